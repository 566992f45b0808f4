//! Two-stage motion generation: a free-text movement narrative, then a motion
//! script written from that narrative.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use thiserror::Error;

use crate::chat::{ChatMessage, ChatRequest, Transport, TransportError};
use crate::script::{parse_script, MotionScript, ScriptDiagnostic};

pub const PROMPT_1_TAG: &str = "prompt-1";
pub const PROMPT_2_TAG: &str = "prompt-2";
pub const REPAIR_TAG: &str = "prompt-2-repair";

pub const NARRATIVE_TEMPLATE: &str = include_str!("../../../prompts/prompt1_narrative.txt");
pub const SCRIPT_TEMPLATE: &str = include_str!("../../../prompts/prompt2_script.txt");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("motion description is empty")]
    EmptyDescription,
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("stage-2 output is not a valid motion script ({} diagnostics)", diagnostics.len())]
    Unparseable {
        narrative: String,
        script_text: String,
        diagnostics: Vec<ScriptDiagnostic>,
    },
}

pub fn narrative_prompt(description: &str) -> String {
    NARRATIVE_TEMPLATE.replace("{description}", description.trim())
}

pub fn script_prompt(narrative: &str) -> String {
    SCRIPT_TEMPLATE.replace("{narrative}", narrative)
}

/// Body of the first fenced code block, or the whole text when there is none.
fn strip_fences(text: &str) -> &str {
    let Some(open) = text.find("```") else {
        return text;
    };
    let after = &text[open + 3..];
    let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
    let body = &after[body_start..];
    match body.find("```") {
        Some(close) => &body[..close],
        None => body,
    }
}

fn diagnostics_text(diags: &[ScriptDiagnostic]) -> String {
    let mut out = String::new();
    for d in diags {
        let _ = writeln!(out, "- {d}");
    }
    out
}

pub fn cot_motion_pipeline<T: Transport + ?Sized>(
    transport: &mut T,
    description: &str,
) -> Result<MotionScript, PipelineError> {
    cot_motion_pipeline_with(transport, description, 0.0)
}

pub fn cot_motion_pipeline_with<T: Transport + ?Sized>(
    transport: &mut T,
    description: &str,
    temperature: f64,
) -> Result<MotionScript, PipelineError> {
    if description.trim().is_empty() {
        return Err(PipelineError::EmptyDescription);
    }
    let stage1 = ChatRequest::new(
        vec![ChatMessage::user(narrative_prompt(description))],
        temperature,
        PROMPT_1_TAG,
    )?;
    let narrative = transport.complete(&stage1)?.content;

    let stage2_prompt = script_prompt(&narrative);
    let stage2 = ChatRequest::new(
        vec![ChatMessage::user(stage2_prompt.clone())],
        temperature,
        PROMPT_2_TAG,
    )?;
    let script_text = transport.complete(&stage2)?.content;
    let diagnostics = match parse_script(strip_fences(&script_text)) {
        Ok(script) => return Ok(script),
        Err(diagnostics) => diagnostics,
    };
    if !transport.is_live() {
        return Err(PipelineError::Unparseable {
            narrative,
            script_text,
            diagnostics,
        });
    }

    let repair = ChatRequest::new(
        vec![
            ChatMessage::user(stage2_prompt),
            ChatMessage::assistant(script_text.clone()),
            ChatMessage::user(alloc::format!(
                "That script has these problems:\n{}Reply with the corrected script only.",
                diagnostics_text(&diagnostics)
            )),
        ],
        temperature,
        REPAIR_TAG,
    )?;
    let repaired = transport.complete(&repair)?.content;
    parse_script(strip_fences(&repaired)).map_err(|diagnostics| PipelineError::Unparseable {
        narrative,
        script_text: repaired.to_string(),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chat::{ChatResponse, MockTransport, ResponseSource};
    use crate::body::axis_group;
    use crate::body::AxisGroup;

    const RIGHT_ARM: &str = "motion raise_right_hand\nat 0.0: 30=0.5\nat 1.0: 30=0.95, 33=0.8\n";

    /// Mock that claims to be live and keeps every request it sees.
    struct LiveMock {
        inner: MockTransport,
        seen: Vec<ChatRequest>,
    }

    impl Transport for LiveMock {
        fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
            self.seen.push(request.clone());
            self.inner.complete(request).map(|mut r| {
                r.source = ResponseSource::Live;
                r
            })
        }

        fn is_live(&self) -> bool {
            true
        }
    }

    #[test]
    fn right_hand_script() {
        let mut mock = MockTransport::new()
            .with_script(PROMPT_1_TAG, ["1. Lift the right arm."])
            .with_script(PROMPT_2_TAG, [RIGHT_ARM]);
        let script = cot_motion_pipeline(&mut mock, "raise the right hand").unwrap();
        assert!(script
            .touched_axes()
            .iter()
            .all(|a| axis_group(*a) == AxisGroup::RightSide));
    }

    #[test]
    fn empty_description() {
        let mut mock = MockTransport::new();
        assert_eq!(
            cot_motion_pipeline(&mut mock, "  "),
            Err(PipelineError::EmptyDescription)
        );
    }

    #[test]
    fn prose_fails_with_both_texts() {
        let mut mock = MockTransport::new()
            .with_script(PROMPT_1_TAG, ["Lift the arm slowly."])
            .with_script(PROMPT_2_TAG, ["I think the robot should raise its arm gracefully."]);
        match cot_motion_pipeline(&mut mock, "raise the right hand") {
            Err(PipelineError::Unparseable {
                narrative,
                script_text,
                diagnostics,
            }) => {
                assert_eq!(narrative, "Lift the arm slowly.");
                assert!(script_text.contains("gracefully"));
                assert!(!diagnostics.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fenced_output_is_accepted() {
        let fenced = alloc::format!("Here you go:\n```text\n{RIGHT_ARM}```\n");
        let mut mock = MockTransport::new()
            .with_script(PROMPT_1_TAG, ["n"])
            .with_script(PROMPT_2_TAG, [fenced]);
        assert!(cot_motion_pipeline(&mut mock, "raise the right hand").is_ok());
    }

    #[test]
    fn stage_two_contains_narrative_and_live_repair_runs_once() {
        let narrative = "1. Raise the right arm high.\n2. Smile.";
        let mut live = LiveMock {
            inner: MockTransport::new()
                .with_script(PROMPT_1_TAG, [narrative])
                .with_script(PROMPT_2_TAG, ["motion x\nat 0.0: 99=0.5"])
                .with_script(REPAIR_TAG, [RIGHT_ARM]),
            seen: Vec::new(),
        };
        let script = cot_motion_pipeline(&mut live, "raise the right hand").unwrap();
        assert_eq!(script.name, "raise_right_hand");
        assert_eq!(live.seen.len(), 3);
        assert!(live.seen[1].messages()[0].content.contains(narrative));
        assert!(live.seen[2].messages()[2].content.contains("unknown-axis"));

        // a second failure is final
        let mut live = LiveMock {
            inner: MockTransport::new()
                .with_script(PROMPT_1_TAG, [narrative])
                .with_script(PROMPT_2_TAG, ["nope"])
                .with_script(REPAIR_TAG, ["still nope"]),
            seen: Vec::new(),
        };
        match cot_motion_pipeline(&mut live, "raise the right hand") {
            Err(PipelineError::Unparseable { script_text, .. }) => assert_eq!(script_text, "still nope"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn transport_errors_propagate() {
        let mut mock = MockTransport::new();
        assert!(matches!(
            cot_motion_pipeline(&mut mock, "wave"),
            Err(PipelineError::Transport(TransportError::ScriptExhausted { .. }))
        ));
    }
}
