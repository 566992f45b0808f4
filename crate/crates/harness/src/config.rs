//! Run configuration: an optional TOML or JSON file, overridden by flags.

use std::path::{Path, PathBuf};

use alter3_core::agent::AgentConfig;
use alter3_core::analysis::RhiConfig;
use alter3_core::{DescriberConfig, Lexicon, MirrorScene, MsrPrompt, Verbosity, DEFAULT_DT};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::files::read_text;
use crate::live::LiveConfig;
use crate::transport::TransportSpec;

/// Every field is optional; absent fields take the defaults of [`RunConfig`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub transport: Option<String>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub trials: Option<u32>,
    pub repeats: Option<u32>,
    pub out_dir: Option<PathBuf>,
    pub parallel: Option<usize>,
    pub record: Option<PathBuf>,
    pub temperature: Option<f64>,
    pub mirror_distance: Option<f64>,
    pub max_steps: Option<u32>,
    pub settle_budget: Option<u32>,
    pub unnamed_mirror: Option<bool>,
    pub verbosity: Option<Verbosity>,
    pub noise_seed: Option<u64>,
    pub misreport_rate: Option<f64>,
    pub lexicon: Option<Lexicon>,
    pub live: Option<LiveConfig>,
}

impl FileConfig {
    /// Parses by extension: `.json` as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| HarnessError::format(path, e.line(), e))
        } else {
            toml::from_str(&text).map_err(|e| {
                let line = e
                    .span()
                    .map_or(0, |s| text[..s.start].matches('\n').count() + 1);
                HarnessError::format(path, line, e.message())
            })
        }
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            transport, seed, dt, trials, repeats, out_dir, parallel, record, temperature,
            mirror_distance, max_steps, settle_budget, unnamed_mirror, verbosity, noise_seed,
            misreport_rate, lexicon, live
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub transport: TransportSpec,
    pub seed: u64,
    pub dt: f64,
    pub trials: u32,
    pub repeats: u32,
    pub out_dir: PathBuf,
    pub parallel: usize,
    pub record: Option<PathBuf>,
    pub mirror: MirrorScene,
    pub agent: AgentConfig,
    pub rhi: RhiConfig,
    pub live: LiveConfig,
}

fn config_error(e: impl ToString) -> HarnessError {
    HarnessError::Config(e.to_string())
}

impl RunConfig {
    pub fn from_file_config(file: FileConfig) -> Result<Self> {
        let transport: TransportSpec = match &file.transport {
            Some(text) => text.parse().map_err(config_error)?,
            None => TransportSpec::Replay(crate::transport::DEFAULT_CASSETTE_DIR.into()),
        };
        transport.validate().map_err(config_error)?;

        let dt = file.dt.unwrap_or(DEFAULT_DT);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(config_error(format!("dt must be positive, got {dt}")));
        }
        let temperature = file.temperature.unwrap_or(0.0);
        if !(0.0..=2.0).contains(&temperature) {
            return Err(config_error(format!(
                "temperature must be within [0, 2], got {temperature}"
            )));
        }
        let parallel = file.parallel.unwrap_or(1);
        if parallel == 0 {
            return Err(config_error("parallel must be at least 1"));
        }
        let mirror = MirrorScene::new(file.mirror_distance.unwrap_or(1.0)).map_err(config_error)?;
        let describer = DescriberConfig::new(
            file.verbosity.unwrap_or_default(),
            file.noise_seed,
            file.misreport_rate.unwrap_or(0.0),
        )
        .map_err(config_error)?;

        let defaults = AgentConfig::default();
        let agent = AgentConfig {
            max_steps: file.max_steps.unwrap_or(defaults.max_steps),
            dt,
            settle_budget: file.settle_budget.unwrap_or(defaults.settle_budget),
            temperature,
            prompt: if file.unnamed_mirror.unwrap_or(false) {
                MsrPrompt::UnnamedMirror
            } else {
                MsrPrompt::Standard
            },
            describer,
        };
        if agent.max_steps < 2 {
            return Err(config_error(format!(
                "max_steps must be at least 2, got {}",
                agent.max_steps
            )));
        }
        let rhi = RhiConfig {
            dt,
            temperature,
            describer,
            lexicon: file.lexicon.unwrap_or_default(),
            ..RhiConfig::default()
        };

        Ok(RunConfig {
            transport,
            seed: file.seed.unwrap_or(0),
            dt,
            trials: file.trials.unwrap_or(10),
            repeats: file.repeats.unwrap_or(5),
            out_dir: file.out_dir.unwrap_or_else(|| "out".into()),
            parallel,
            record: file.record,
            mirror,
            agent,
            rhi,
            live: file.live.unwrap_or_default(),
        })
    }
}
