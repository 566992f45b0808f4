//! Transport specs (`live`, `replay[:path]`, `mock:path`) and their per-trial
//! resolution.
//!
//! A replay or mock path may name a single file, used for every trial, or a
//! directory laid out as `<dir>/<set>/<item>.jsonl` (replay) or
//! `<dir>/<set>/<item>.json` (mock), for example
//! `fixtures/cassettes/msr_faithful/trial_03.jsonl`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use alter3_core::{
    Cassette, RecordingTransport, ReplayTransport, Transport, TransportError,
};

use crate::files::{read_cassette, read_mock, write_cassette};
use crate::live::{LiveConfig, LiveTransport};

pub const DEFAULT_CASSETTE_DIR: &str = "fixtures/cassettes";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportSpec {
    Live,
    Replay(PathBuf),
    Mock(PathBuf),
}

impl FromStr for TransportSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, path) = match s.split_once(':') {
            Some((kind, path)) => (kind, Some(path)),
            None => (s, None),
        };
        match (kind, path) {
            ("live", None) => Ok(TransportSpec::Live),
            ("replay", None) => Ok(TransportSpec::Replay(DEFAULT_CASSETTE_DIR.into())),
            ("replay", Some(p)) if !p.is_empty() => Ok(TransportSpec::Replay(p.into())),
            ("mock", Some(p)) if !p.is_empty() => Ok(TransportSpec::Mock(p.into())),
            _ => Err(format!(
                "invalid transport {s:?}; expected live, replay, replay:<path> or mock:<path>"
            )),
        }
    }
}

impl fmt::Display for TransportSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransportSpec::Live => f.write_str("live"),
            TransportSpec::Replay(p) => write!(f, "replay:{}", p.display()),
            TransportSpec::Mock(p) => write!(f, "mock:{}", p.display()),
        }
    }
}

pub type BoxedTransport = Box<dyn Transport + Send>;

/// A transport opened for one trial, and the transport string that reopens it.
pub struct Opened {
    pub transport: BoxedTransport,
    pub source: TransportSpec,
    pub model: String,
}

impl TransportSpec {
    pub fn is_live(&self) -> bool {
        matches!(self, TransportSpec::Live)
    }

    /// Checks that replay and mock paths exist.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            TransportSpec::Live => Ok(()),
            TransportSpec::Replay(p) | TransportSpec::Mock(p) if p.exists() => Ok(()),
            TransportSpec::Replay(p) | TransportSpec::Mock(p) => {
                Err(format!("transport path {} does not exist", p.display()))
            }
        }
    }

    /// The concrete file for `item` of `set`, when the transport names a directory.
    pub fn resolve(&self, set: &str, item: &str) -> TransportSpec {
        let pick = |root: &Path, ext: &str| {
            if root.is_dir() {
                root.join(set).join(format!("{item}.{ext}"))
            } else {
                root.to_path_buf()
            }
        };
        match self {
            TransportSpec::Live => TransportSpec::Live,
            TransportSpec::Replay(p) => TransportSpec::Replay(pick(p, "jsonl")),
            TransportSpec::Mock(p) => TransportSpec::Mock(pick(p, "json")),
        }
    }

    pub fn open(&self, set: &str, item: &str, live: &LiveConfig) -> Result<Opened, TransportError> {
        let source = self.resolve(set, item);
        let unreadable = |e: crate::HarnessError| TransportError::Network(e.to_string());
        let (transport, model): (BoxedTransport, String) = match &source {
            TransportSpec::Live => {
                let live_transport = LiveTransport::from_env(live).map_err(TransportError::Network)?;
                let model = live_transport.model().to_string();
                (Box::new(live_transport), model)
            }
            TransportSpec::Replay(p) => {
                let cassette = read_cassette(p).map_err(unreadable)?;
                let model = cassette.model.clone();
                (Box::new(ReplayTransport::new(cassette)), model)
            }
            TransportSpec::Mock(p) => (Box::new(read_mock(p).map_err(unreadable)?), "mock".into()),
        };
        Ok(Opened {
            transport,
            source,
            model,
        })
    }
}

/// Records a trial's exchanges and saves them as `<dir>/<set>/<item>.jsonl`.
pub struct Recorder {
    path: PathBuf,
}

impl Recorder {
    pub fn new(dir: &Path, set: &str, item: &str) -> Self {
        Recorder {
            path: dir.join(set).join(format!("{item}.jsonl")),
        }
    }

    pub fn wrap(&self, opened: Opened) -> RecordingTransport<BoxedTransport> {
        let recorded_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        RecordingTransport::new(opened.transport, Cassette::new(recorded_at, opened.model))
    }

    pub fn save(&self, cassette: &Cassette) -> crate::error::Result<TransportSpec> {
        write_cassette(&self.path, cassette)?;
        Ok(TransportSpec::Replay(self.path.clone()))
    }
}

pub fn item_name(prefix: &str, index: u32) -> String {
    format!("{prefix}_{index:02}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_grammar() {
        assert_eq!("live".parse(), Ok(TransportSpec::Live));
        assert_eq!(
            "replay".parse(),
            Ok(TransportSpec::Replay(DEFAULT_CASSETTE_DIR.into()))
        );
        assert_eq!(
            "mock:fixtures/raise.json".parse(),
            Ok(TransportSpec::Mock("fixtures/raise.json".into()))
        );
        assert!("mock".parse::<TransportSpec>().is_err());
        assert!("replay:".parse::<TransportSpec>().is_err());
        assert!("http://x".parse::<TransportSpec>().is_err());
        let spec: TransportSpec = "replay:a/b.jsonl".parse().unwrap();
        assert_eq!(spec.to_string(), "replay:a/b.jsonl");
    }

    #[test]
    fn directory_resolution() {
        let dir = tempfile::tempdir().unwrap();
        let spec = TransportSpec::Replay(dir.path().to_path_buf());
        assert_eq!(
            spec.resolve("msr_faithful", &item_name("trial", 3)),
            TransportSpec::Replay(dir.path().join("msr_faithful/trial_03.jsonl"))
        );
        let file = dir.path().join("one.json");
        std::fs::write(&file, "{}").unwrap();
        let spec = TransportSpec::Mock(file.clone());
        assert_eq!(spec.resolve("x", "y"), TransportSpec::Mock(file));
        assert!(TransportSpec::Mock(dir.path().join("nope")).validate().is_err());
    }
}
