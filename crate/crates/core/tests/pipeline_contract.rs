use std::collections::BTreeMap;
use std::path::Path;

use alter3_core::{cot_motion_pipeline, MockTransport, PipelineError};

fn fixture_mock(name: &str) -> MockTransport {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    let scripts: BTreeMap<String, Vec<String>> = serde_json::from_str(&text).unwrap();
    scripts
        .into_iter()
        .fold(MockTransport::new(), |mock, (tag, responses)| mock.with_script(&tag, responses))
}

#[test]
fn raise_right_hand_stays_on_the_right_side() {
    let mut mock = fixture_mock("raise.json");
    let script = cot_motion_pipeline(&mut mock, "raise the right hand").unwrap();
    let axes: Vec<u8> = script.touched_axes().iter().map(|a| a.get()).collect();
    assert!(!axes.is_empty());
    assert!(axes.iter().all(|a| (29..=41).contains(a)), "{axes:?}");
    assert_eq!(mock.remaining("prompt-1") + mock.remaining("prompt-2"), 0);
}

#[test]
fn prose_reply_keeps_both_stage_texts() {
    let mut mock = fixture_mock("prose.json");
    match cot_motion_pipeline(&mut mock, "raise the right hand") {
        Err(PipelineError::Unparseable {
            narrative,
            script_text,
            diagnostics,
        }) => {
            assert!(narrative.contains("right shoulder"));
            assert!(script_text.contains("lift its right arm"));
            assert!(!diagnostics.is_empty());
        }
        other => panic!("expected an unparseable-script error, got {other:?}"),
    }
}
