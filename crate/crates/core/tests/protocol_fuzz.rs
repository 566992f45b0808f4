use alter3_core::protocol::Millis;
use alter3_core::{decode_frame, decode_stream, encode_frame, encode_stream, AxisId, Frame, FrameError};
use proptest::prelude::*;

fn frame() -> impl Strategy<Value = Frame> {
    prop_oneof![
        8 => (1u32..=43, 0u16..=1000).prop_map(|(a, m)| Frame::Move {
            axis: AxisId::new(a).unwrap(),
            millis: Millis::new(m).unwrap(),
        }),
        1 => Just(Frame::Sync),
        1 => Just(Frame::Nop),
    ]
}

/// Mostly protocol-looking bytes, so the decoder is exercised past the tag.
fn noise() -> impl Strategy<Value = Vec<u8>> {
    let byte = prop_oneof![
        3 => prop::sample::select(b"MSN 0123456789\n".to_vec()),
        1 => any::<u8>(),
    ];
    proptest::collection::vec(byte, 0..24)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn frame_round_trip(f in frame()) {
        let bytes = encode_frame(&f);
        prop_assert_eq!(bytes.last(), Some(&b'\n'));
        prop_assert_eq!(decode_frame(&bytes), Ok(f));
    }

    #[test]
    fn random_bytes_never_panic(bytes in noise()) {
        if let Ok(frame) = decode_frame(&bytes) {
            prop_assert_eq!(encode_frame(&frame), bytes.clone());
        }
        if let Ok(frames) = decode_stream(&bytes) {
            prop_assert_eq!(encode_stream(&frames), bytes);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn stream_round_trip(frames in proptest::collection::vec(frame(), 0..40)) {
        prop_assert_eq!(decode_stream(&encode_stream(&frames)), Ok(frames));
    }
}

#[test]
fn diagnostics() {
    assert_eq!(decode_frame(b""), Err(FrameError::Empty));
    assert_eq!(decode_frame(b"S"), Err(FrameError::MissingNewline));
    assert_eq!(decode_frame(b"S\nS\n"), Err(FrameError::TrailingBytes));
    assert_eq!(decode_frame(b"M 44 10\n"), Err(FrameError::AxisRange(44)));
    assert_eq!(decode_frame(b"M 0 10\n"), Err(FrameError::AxisRange(0)));
    assert_eq!(decode_frame(b"M 3 1001\n"), Err(FrameError::MillisRange(1001)));
    assert!(matches!(decode_frame(b"M 03 5\n"), Err(FrameError::Malformed(_))));
    assert!(matches!(decode_frame(b"M 3\n"), Err(FrameError::Malformed(_))));
    assert!(matches!(decode_frame(b"X 3 5\n"), Err(FrameError::UnknownTag(t)) if t == "X"));
    assert_eq!(decode_stream(b"S\nM 1 2\nQ\n"), Err((2, FrameError::UnknownTag("Q".into()))));
}
