use adsb_tesla::frame::{
    decode_frame, pack_payload, unpack_payload, AuthPayload, CaptureLine, Frame, RawFrame,
};
use adsb_tesla::{Bits50, CodecError, Message};
use proptest::prelude::*;

fn any_frame() -> impl Strategy<Value = Frame> {
    (0u8..32, 0u8..8, 0u32..1 << 24, 0u64..1 << 56)
        .prop_map(|(df, ca, icao, me)| Frame::new(df, ca, icao, me).unwrap())
}

fn any_payload() -> impl Strategy<Value = AuthPayload> {
    prop_oneof![
        (0u64..1 << 51).prop_map(|v| AuthPayload::Data(Message::new(v).unwrap())),
        (0u64..1 << 50).prop_map(|v| AuthPayload::Mac(Bits50::new(v).unwrap())),
        (0u64..1 << 50).prop_map(|v| AuthPayload::Key(Bits50::new(v).unwrap())),
    ]
}

proptest! {
    #[test]
    fn frame_round_trip(f in any_frame()) {
        let raw = f.to_raw();
        prop_assert_eq!(raw.syndrome(), 0);
        let back = decode_frame(&raw, 0).unwrap();
        prop_assert_eq!(back.frame, f);
        prop_assert_eq!(back.corrected_bits, 0);
    }

    #[test]
    fn single_bit_errors_are_corrected(f in any_frame(), pos in 0usize..112) {
        let mut raw = f.to_raw();
        raw.flip_bit(pos);
        let strict = decode_frame(&raw, 0);
        prop_assert!(matches!(strict, Err(CodecError::Integrity { .. })), "uncorrected decode accepted");
        let fixed = decode_frame(&raw, 1).unwrap();
        prop_assert_eq!(fixed.frame, f);
        prop_assert_eq!(fixed.raw, f.to_raw());
    }

    #[test]
    fn short_bursts_are_corrected(f in any_frame(), start in 0usize..108, pattern in 1u8..16) {
        let mut raw = f.to_raw();
        for b in 0..4 {
            if pattern >> b & 1 == 1 {
                raw.flip_bit(start + b);
            }
        }
        let fixed = decode_frame(&raw, 4).unwrap();
        prop_assert_eq!(fixed.frame, f);
        prop_assert_eq!(fixed.corrected_bits, pattern.count_ones());
    }

    #[test]
    fn payload_round_trip(p in any_payload()) {
        let me = pack_payload(&p);
        prop_assert!(me < 1 << 56);
        prop_assert_eq!(u64::from(p.type_code()), me >> 51);
        prop_assert_eq!(unpack_payload(me).unwrap(), p);
    }

    #[test]
    fn capture_lines_round_trip(f in any_frame(), ts in proptest::option::of(any::<u64>())) {
        let line = CaptureLine { raw: f.to_raw(), timestamp_us: ts };
        let text = line.to_string();
        prop_assert_eq!(text.parse::<CaptureLine>().unwrap(), line);
        prop_assert_eq!(RawFrame::from_slice(line.raw.as_bytes()).unwrap(), line.raw);
    }
}

#[test]
fn width_violations_are_rejected() {
    assert!(matches!(
        Frame::new(32, 0, 0, 0),
        Err(CodecError::Width { .. })
    ));
    assert!(matches!(
        Frame::new(17, 8, 0, 0),
        Err(CodecError::Width { .. })
    ));
    assert!(matches!(
        Frame::new(17, 0, 1 << 24, 0),
        Err(CodecError::Width { .. })
    ));
    assert!(matches!(
        Frame::new(17, 0, 0, 1 << 56),
        Err(CodecError::Width { .. })
    ));
    assert!(matches!(
        RawFrame::from_slice(&[0; 13]),
        Err(CodecError::Length { .. })
    ));
    assert!(matches!(
        unpack_payload((26 << 51) | 1),
        Err(CodecError::Padding)
    ));
    assert!(matches!(
        unpack_payload(3 << 51),
        Err(CodecError::UnknownPayload(3))
    ));
    assert!(matches!(
        decode_frame(&RawFrame([0; 14]), 6),
        Err(CodecError::CorrectionLimit(6))
    ));
}
