//! Transcript files: one JSON object per agent step, then a footer line with
//! the outcome and the full trial setup.
//!
//! ```text
//! {"type":"step","index":1,"tool":"MotionGeneration",...}
//! {"type":"step","index":2,"tool":"CaptureImage",...}
//! {"type":"footer","outcome":{...},"trial":{...}}
//! ```
//!
//! A `CaptureImage` step also carries the photo it took as `"snapshot"`, in
//! canonical snapshot JSON (six-decimal numbers). Parsing drops it.
//!
//! The footer's `trial.transport` names the exact cassette or mock file the
//! trial ran against, so `alter3 replay` can run it again and compare.

use std::path::Path;

use alter3_core::agent::AgentConfig;
use alter3_core::canonical::snapshot_json;
use alter3_core::{
    AgentMemory, AgentStep, MirrorScene, MsrCase, MsrTrial, TransportError, TrialResult, Verdict,
    VerdictKind,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSetup {
    pub case: MsrCase,
    pub index: u32,
    pub seed: u64,
    pub transport: String,
    pub mirror_distance: f64,
    pub agent: AgentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed {
        verdict: Verdict,
        config_digest: String,
    },
    Aborted {
        reason: TransportError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Footer {
    pub outcome: Outcome,
    pub expected: VerdictKind,
    pub correct: bool,
    pub trial: TrialSetup,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Step(AgentStep),
    Footer(Footer),
}

pub fn render_transcript(trial: &MsrTrial, setup: &TrialSetup) -> String {
    let outcome = match &trial.result {
        TrialResult::Completed(t) => Outcome::Completed {
            verdict: t.verdict.clone(),
            config_digest: t.config_digest.clone(),
        },
        TrialResult::Aborted(a) => Outcome::Aborted {
            reason: a.reason.clone(),
        },
    };
    let mut out = String::new();
    for step in trial.memory().steps() {
        let bare = AgentStep {
            snapshot: None,
            ..step.clone()
        };
        let line = serde_json::to_string(&Line::Step(bare)).expect("step serializes");
        match &step.snapshot {
            Some(snapshot) => {
                out.push_str(line.strip_suffix('}').expect("object"));
                out.push_str(",\"snapshot\":");
                out.push_str(&snapshot_json(snapshot));
                out.push('}');
            }
            None => out.push_str(&line),
        }
        out.push('\n');
    }
    let footer = Footer {
        outcome,
        expected: trial.expected,
        correct: trial.correct,
        trial: setup.clone(),
    };
    out.push_str(&serde_json::to_string(&Line::Footer(footer)).expect("footer serializes"));
    out.push('\n');
    out
}

pub fn parse_transcript(path: &Path, text: &str) -> Result<(AgentMemory, Footer)> {
    let mut steps = Vec::new();
    let mut footer = None;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        if footer.is_some() {
            return Err(HarnessError::format(path, i + 1, "content after the footer"));
        }
        let mut value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| HarnessError::format(path, i + 1, e))?;
        if let Some(object) = value.as_object_mut() {
            object.remove("snapshot");
        }
        match serde_json::from_value(value).map_err(|e| HarnessError::format(path, i + 1, e))? {
            Line::Step(step) => steps.push(step),
            Line::Footer(f) => footer = Some(f),
        }
    }
    let line_count = text.lines().count();
    let footer = footer.ok_or_else(|| HarnessError::format(path, line_count, "missing footer"))?;
    let memory = AgentMemory::from_steps(steps)
        .ok_or_else(|| HarnessError::format(path, 1, "step indices are not 1..n"))?;
    Ok((memory, footer))
}

impl TrialSetup {
    pub fn mirror(&self) -> std::result::Result<MirrorScene, String> {
        MirrorScene::new(self.mirror_distance).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alter3_core::analysis::unopened_trial;

    #[test]
    fn aborted_round_trip() {
        let trial = unopened_trial(
            MsrCase::Random,
            2,
            5,
            TransportError::Network("offline".into()),
        );
        let setup = TrialSetup {
            case: MsrCase::Random,
            index: 2,
            seed: 5,
            transport: "mock:x.json".into(),
            mirror_distance: 1.0,
            agent: AgentConfig::default(),
        };
        let text = render_transcript(&trial, &setup);
        assert_eq!(text.lines().count(), 1);
        let (memory, footer) = parse_transcript(Path::new("t.jsonl"), &text).unwrap();
        assert!(memory.is_empty());
        assert_eq!(footer.trial, setup);
        assert!(!footer.correct);
        assert!(matches!(footer.outcome, Outcome::Aborted { .. }));
        assert!(parse_transcript(Path::new("t.jsonl"), "").is_err());
    }
}
