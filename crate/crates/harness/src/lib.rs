//! File formats, transports, experiment runners and the `alter3` command line
//! built on top of `alter3-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod files;
pub mod live;
pub mod runner;
pub mod transcript;
pub mod transport;

pub use config::{FileConfig, RunConfig};
pub use error::HarnessError;
pub use transport::TransportSpec;
