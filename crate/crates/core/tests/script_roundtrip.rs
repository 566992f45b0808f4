use std::collections::BTreeMap;

use alter3_core::{
    compile_schedule, compile_to_frames, decode_stream, default_body_spec, encode_stream,
    parse_script, play_schedule, render_script, validate_script, ActuationMode, AxisId, BodyState,
    Keyframe, MotionScript, Pose, Severity,
};
use proptest::prelude::*;

/// Times and values in whole thousandths, as the parser stores them.
fn script(min_gap_ms: u32, lo: i32, hi: i32) -> impl Strategy<Value = MotionScript> {
    let frame = (
        min_gap_ms..min_gap_ms + 2_000,
        proptest::collection::btree_map(1u32..=43, lo..=hi, 1..6),
    );
    ("[a-z][a-z0-9_]{0,12}", 0u32..500, proptest::collection::vec(frame, 1..7)).prop_map(
        |(name, start, frames)| {
            let mut at_ms = start;
            let frames = frames
                .into_iter()
                .enumerate()
                .map(|(i, (gap, targets))| {
                    if i > 0 {
                        at_ms += gap;
                    }
                    Keyframe {
                        at: f64::from(at_ms) / 1000.0,
                        targets: targets
                            .into_iter()
                            .map(|(a, v)| (AxisId::new(a).unwrap(), f64::from(v) / 1000.0))
                            .collect(),
                    }
                })
                .collect();
            MotionScript { name, frames }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn parse_render_fixpoint(s in script(1, 0, 1000)) {
        let text = render_script(&s);
        let parsed = parse_script(&text).unwrap();
        prop_assert_eq!(&parsed, &s);
        prop_assert_eq!(render_script(&parsed), text);
    }

    #[test]
    fn lowering_ends_at_final_keyframe(s in script(1_000, 0, 1000)) {
        let spec = default_body_spec();
        let diags = validate_script(&spec, &s);
        prop_assert!(diags.iter().all(|d| d.severity != Severity::Warning), "{diags:?}");

        let mut expected = Pose::neutral().values().to_vec();
        for (axis, value) in s.final_targets() {
            expected[axis.slot()] = spec.axis(axis).clamp(value);
        }

        let schedule = compile_schedule(&s, &spec, 0.125).unwrap();
        let mut played = BodyState::neutral(ActuationMode::Faithful, 0);
        play_schedule(&mut played, &schedule, 0.125).unwrap();
        played.settle(0.125, 200).unwrap();
        prop_assert_eq!(played.current().values(), &expected[..]);

        // the same frames through the wire
        let wire = encode_stream(&compile_to_frames(&s, &spec, 0.125).unwrap());
        let mut direct = BodyState::neutral(ActuationMode::Faithful, 0);
        for frame in decode_stream(&wire).unwrap() {
            direct.apply_frame(&frame).unwrap();
        }
        direct.settle(0.125, 200).unwrap();
        prop_assert_eq!(direct.current().values(), &expected[..]);
    }
}

#[test]
fn parser_diagnostics_are_per_line() {
    let text = "motion bad\nat 0.0: 30=0.5\nat 0.5: 99=0.5\nat 0.2: 30=0.1\nat one: 30=0.1\nat 1.0: 30=0.9\n";
    let diags = parse_script(text).unwrap_err();
    let lines: Vec<u32> = diags.iter().map(|d| d.line).collect();
    assert_eq!(lines, [3, 4, 5]);
}

#[test]
fn comments_and_blank_lines() {
    let text = "# header comment\n\nmotion wave  # trailing\nat 0: 30=0.25\n\nat 1.5: 30=1, 31=0\n";
    let s = parse_script(text).unwrap();
    assert_eq!(s.name, "wave");
    assert_eq!(s.frames.len(), 2);
    let want: BTreeMap<AxisId, f64> = [(AxisId::new(30).unwrap(), 1.0), (AxisId::new(31).unwrap(), 0.0)].into();
    assert_eq!(s.frames[1].targets, want);
    assert_eq!(render_script(&s), "motion wave\nat 0.000: 30=0.250\nat 1.500: 30=1.000, 31=0.000\n");
}
