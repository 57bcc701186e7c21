use std::ptr;

use adsb_tesla_ffi::*;

const SEED: [u8; 32] = [7; 32];

fn chain(n: u64) -> *mut AtKeyChain {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { at_keychain_new(SEED.as_ptr(), n, &mut out) },
        AtStatus::Ok
    );
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let n = unsafe { at_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn frame_round_trip() {
    let mut bytes = [0u8; 14];
    let me = (25u64 << 51) | 0x1234;
    assert_eq!(
        unsafe { at_encode_frame(17, 5, 0xABCDEF, me, bytes.as_mut_ptr()) },
        AtStatus::Ok
    );
    let mut f = AtFrame {
        df: 0,
        capability: 0,
        icao: 0,
        me: 0,
        parity: 0,
    };
    let mut corrected = 9;
    bytes[5] ^= 0x10;
    assert_eq!(
        unsafe { at_decode_frame(bytes.as_ptr(), 1, &mut f, &mut corrected) },
        AtStatus::Ok
    );
    assert_eq!(
        (f.df, f.capability, f.icao, f.me, corrected),
        (17, 5, 0xABCDEF, me, 1)
    );

    let mut crc = 0;
    assert_eq!(unsafe { at_crc24(bytes.as_ptr(), &mut crc) }, AtStatus::Ok);
}

#[test]
fn decode_errors_map_to_codes() {
    let mut bytes = [0u8; 14];
    unsafe { at_encode_frame(17, 5, 1, 0, bytes.as_mut_ptr()) };
    bytes[0] ^= 0x81;
    let mut f = AtFrame {
        df: 0,
        capability: 0,
        icao: 0,
        me: 0,
        parity: 0,
    };
    assert_eq!(
        unsafe { at_decode_frame(bytes.as_ptr(), 0, &mut f, ptr::null_mut()) },
        AtStatus::Integrity
    );
    assert!(last_error().contains("parity"));
    assert_eq!(
        unsafe { at_encode_frame(32, 5, 1, 0, bytes.as_mut_ptr()) },
        AtStatus::Width
    );
    assert_eq!(
        unsafe { at_decode_frame(ptr::null(), 0, &mut f, ptr::null_mut()) },
        AtStatus::NullPointer
    );
}

#[test]
fn chain_access_and_links() {
    let c = chain(8);
    assert_eq!(unsafe { at_keychain_len(c) }, 8);
    let (mut k3, mut k0) = (0, 0);
    unsafe {
        assert_eq!(at_keychain_key(c, 3, &mut k3), AtStatus::Ok);
        assert_eq!(at_keychain_key(c, 0, &mut k0), AtStatus::Ok);
        assert_eq!(at_keychain_key(c, 9, &mut k0), AtStatus::InvalidArgument);
    }
    let mut ok = false;
    unsafe {
        assert_eq!(at_verify_chain_link(k3, k0, 3, 64, &mut ok), AtStatus::Ok);
        assert!(ok);
        at_verify_chain_link(k3, k0, 2, 64, &mut ok);
        assert!(!ok);
        assert_eq!(
            at_verify_chain_link(k3, k0, 65, 64, &mut ok),
            AtStatus::InvalidArgument
        );
    }
    let mut step = k3;
    for _ in 0..3 {
        unsafe { at_f(step, &mut step) };
    }
    assert_eq!(step, k0);
    unsafe { at_keychain_free(c) };
}

#[test]
fn width_checks_on_keys() {
    let mut out = 0;
    assert_eq!(unsafe { at_f(1 << 50, &mut out) }, AtStatus::Width);
    assert_eq!(unsafe { at_g(1 << 50, &mut out) }, AtStatus::Width);
    assert_eq!(unsafe { at_g(5, ptr::null_mut()) }, AtStatus::NullPointer);
}

#[test]
fn mac_matches_library() {
    let msg = [1u8, 2, 3];
    let mut tag = 0;
    assert_eq!(
        unsafe { at_mac50(42, msg.as_ptr(), msg.len(), &mut tag) },
        AtStatus::Ok
    );
    let key = adsb_tesla::crypto::g(adsb_tesla::Bits50::new(42).unwrap());
    assert_eq!(tag, adsb_tesla::crypto::hmac50(&key, &msg).value());
    assert_eq!(
        unsafe { at_mac50(42, ptr::null(), 0, &mut tag) },
        AtStatus::Ok
    );
}

#[test]
fn sender_to_receiver_session() {
    let c = chain(10);
    let mut tx = ptr::null_mut();
    let mut rx = ptr::null_mut();
    let mut anchor = 0;
    unsafe {
        assert_eq!(at_sender_new(0x4CA123, c, 2, 3, 2, &mut tx), AtStatus::Ok);
        assert_eq!(at_receiver_new(2, 3, &mut rx), AtStatus::Ok);
        at_keychain_key(c, 0, &mut anchor);
        assert_eq!(at_receiver_provision(rx, 0x4CA123, anchor, 0), AtStatus::Ok);
        // the sender keeps its own copy of the chain
        at_keychain_free(c);
    }
    let cap = unsafe { at_sender_max_frames(tx) };
    assert_eq!(cap, 6);
    let mut buf = vec![0u8; cap * 14];
    let feed = |n: usize, buf: &[u8]| {
        for f in buf[..n * 14].chunks(14) {
            assert_eq!(
                unsafe { at_receiver_push(rx, f.as_ptr(), ptr::null_mut()) },
                AtStatus::Ok
            );
        }
    };
    for m in 0..10u64 {
        let mut n = 0;
        assert_eq!(
            unsafe { at_sender_emit(tx, m * 1000, buf.as_mut_ptr(), cap, &mut n) },
            AtStatus::Ok
        );
        feed(n, &buf);
    }
    let mut n = 0;
    assert_eq!(
        unsafe { at_sender_finish(tx, buf.as_mut_ptr(), cap, &mut n) },
        AtStatus::Ok
    );
    assert_eq!(n, 2);
    feed(n, &buf);
    let mut pending = 0;
    unsafe { at_receiver_finish(rx, &mut pending) };
    assert_eq!(pending, 10);

    let mut v = AtVerdict {
        icao: 0,
        seq: 0,
        message: 0,
        status: AtVerdictStatus::Invalid,
        interval: 0,
    };
    let mut seen = Vec::new();
    while unsafe { at_receiver_next_verdict(rx, &mut v) } {
        assert_eq!(v.status, AtVerdictStatus::Valid);
        assert_eq!(v.icao, 0x4CA123);
        seen.push(v.message);
    }
    seen.sort();
    assert_eq!(seen, (0..10).map(|m| m * 1000).collect::<Vec<_>>());

    let mut s = AtSummary::default();
    unsafe { at_receiver_summary(rx, &mut s) };
    assert_eq!((s.valid, s.invalid, s.expired), (10, 0, 0));
    unsafe {
        at_sender_free(tx);
        at_receiver_free(rx);
    }
}

#[test]
fn small_buffer_is_rejected_without_consuming() {
    let c = chain(4);
    let mut tx = ptr::null_mut();
    unsafe { at_sender_new(1, c, 1, 1, 2, &mut tx) };
    let mut buf = [0u8; 14 * 2];
    let mut n = 0;
    assert_eq!(
        unsafe { at_sender_emit(tx, 1, buf.as_mut_ptr(), 2, &mut n) },
        AtStatus::BufferTooSmall
    );
    let mut big = [0u8; 14 * 6];
    assert_eq!(
        unsafe { at_sender_emit(tx, 1, big.as_mut_ptr(), 6, &mut n) },
        AtStatus::Ok
    );
    // one message closes the interval, so K_1 goes out with it
    assert_eq!(n, 6);
    unsafe {
        at_sender_free(tx);
        at_keychain_free(c);
    }
}

#[test]
fn oversized_message_and_exhaustion() {
    let c = chain(1);
    let mut tx = ptr::null_mut();
    unsafe { at_sender_new(1, c, 1, 1, 1, &mut tx) };
    let mut buf = [0u8; 14 * 3];
    let mut n = 0;
    assert_eq!(
        unsafe { at_sender_emit(tx, 1 << 51, buf.as_mut_ptr(), 3, &mut n) },
        AtStatus::Width
    );
    assert_eq!(
        unsafe { at_sender_emit(tx, 1, buf.as_mut_ptr(), 3, &mut n) },
        AtStatus::Ok
    );
    assert_eq!(
        unsafe { at_sender_emit(tx, 2, buf.as_mut_ptr(), 3, &mut n) },
        AtStatus::ChainExhausted
    );
    assert!(last_error().contains("exhausted"));
    unsafe {
        at_sender_free(tx);
        at_keychain_free(c);
    }
}

#[test]
fn bad_handles_and_params() {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { at_keychain_new(SEED.as_ptr(), 0, &mut out) },
        AtStatus::InvalidArgument
    );
    let mut rx = ptr::null_mut();
    assert_eq!(
        unsafe { at_receiver_new(0, 1, &mut rx) },
        AtStatus::InvalidArgument
    );
    assert!(rx.is_null());
    assert_eq!(
        unsafe { at_sender_new(1, ptr::null(), 1, 1, 1, &mut ptr::null_mut()) },
        AtStatus::NullPointer
    );
    unsafe {
        at_keychain_free(ptr::null_mut());
        at_sender_free(ptr::null_mut());
        at_receiver_free(ptr::null_mut());
    }
    assert_eq!(unsafe { at_keychain_len(ptr::null()) }, 0);
    let mut v = AtVerdict {
        icao: 0,
        seq: 0,
        message: 0,
        status: AtVerdictStatus::Valid,
        interval: 0,
    };
    assert!(!unsafe { at_receiver_next_verdict(ptr::null_mut(), &mut v) });
}

#[test]
fn collision_functions() {
    let mut p = -1.0;
    assert_eq!(
        unsafe { at_p_collision_single(1, 1e6, 1.0, &mut p) },
        AtStatus::Ok
    );
    assert!((p - (1.0 - 2.0 / std::f64::consts::E)).abs() < 1e-12);
    assert_eq!(
        unsafe { at_p_collision_single(1, 0.0, 1.0, &mut p) },
        AtStatus::InvalidArgument
    );
    let mut both = 0.0;
    assert_eq!(
        unsafe { at_p_collision_combined(200, 1.0, true, &mut both) },
        AtStatus::Ok
    );
    let mut mode_s = 0.0;
    unsafe { at_p_collision_single(200, 112.0, 1.0 / 6.2, &mut mode_s) };
    assert!(both > mode_s);
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/adsb_tesla.h"))
            .unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<_> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() > 20);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    assert!(header.contains("typedef struct AtReceiver AtReceiver;"));
    assert!(header.contains("AT_STATUS_BUFFER_TOO_SMALL = 7"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"adsb_tesla.h\"\nint main(void) { AtFrame f; (void)f; return AT_STATUS_OK; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc)
            .arg("--version")
            .output()
            .is_ok()
        {
            return Ok(cc);
        }
    }
    Err(())
}
