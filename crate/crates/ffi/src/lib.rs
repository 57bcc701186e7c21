//! C ABI over `adsb-tesla`.
//!
//! Objects are opaque handles created by `*_new` and released by the
//! matching `*_free`. Every fallible call returns an [`AtStatus`]; on
//! failure a description is available from [`at_last_error`] on the same
//! thread. 50- and 51-bit values travel right-aligned in `uint64_t`.

use std::cell::RefCell;
use std::collections::VecDeque;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use adsb_tesla::crypto::{self, ChainKey, KeyChain, Seed};
use adsb_tesla::frame::{self, CodecError, RawFrame, FRAME_BYTES, PAYLOAD_BYTES};
use adsb_tesla::receiver::{Receiver, ReceiverConfig, Status, Summary, Verdict};
use adsb_tesla::sender::{Schedule, Sender, SenderConfig, SenderError};
use adsb_tesla::sim::{self, CollisionParams, TrafficClass};
use adsb_tesla::{Bits50, Message};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A field does not fit its bit width.
    Width = 3,
    /// Parity check failed and the frame could not be corrected.
    Integrity = 4,
    /// The ME field does not carry a protocol payload.
    UnknownPayload = 5,
    ChainExhausted = 6,
    /// Output buffer too small; nothing was written or consumed.
    BufferTooSmall = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtVerdictStatus {
    Valid = 0,
    Invalid = 1,
    DroppedUnsafe = 2,
    ExpiredUnpaired = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtFrame {
    pub df: u8,
    pub capability: u8,
    pub icao: u32,
    pub me: u64,
    pub parity: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtVerdict {
    pub icao: u32,
    pub seq: u64,
    pub message: u64,
    pub status: AtVerdictStatus,
    pub interval: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AtSummary {
    pub valid: u64,
    pub invalid: u64,
    pub dropped_unsafe: u64,
    pub expired: u64,
    pub unverifiable: u64,
    pub corrupt: u64,
    pub non_protocol: u64,
    pub invalid_keys: u64,
}

/// Opaque key chain.
pub struct AtKeyChain(KeyChain);

/// Opaque sender.
pub struct AtSender(Sender);

/// Opaque multi-sender receiver with a queue of pending verdicts.
pub struct AtReceiver {
    inner: Receiver,
    pending: VecDeque<Verdict>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(AtStatus, String);

impl From<CodecError> for Failure {
    fn from(e: CodecError) -> Self {
        let code = match e {
            CodecError::Width { .. } | CodecError::Length { .. } | CodecError::Padding => {
                AtStatus::Width
            }
            CodecError::Integrity { .. } => AtStatus::Integrity,
            CodecError::UnknownPayload(_) => AtStatus::UnknownPayload,
            _ => AtStatus::InvalidArgument,
        };
        Failure(code, e.to_string())
    }
}

impl From<SenderError> for Failure {
    fn from(e: SenderError) -> Self {
        let code = match e {
            SenderError::ChainExhausted { .. } => AtStatus::ChainExhausted,
            SenderError::Codec(_) => AtStatus::Width,
            _ => AtStatus::InvalidArgument,
        };
        Failure(code, e.to_string())
    }
}

fn invalid(msg: impl ToString) -> Failure {
    Failure(AtStatus::InvalidArgument, msg.to_string())
}

fn null(what: &str) -> Failure {
    Failure(AtStatus::NullPointer, format!("{what} is null"))
}

// Runs `f`, recording failures and converting panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AtStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            AtStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn bits50(v: u64) -> Result<Bits50, Failure> {
    Bits50::new(v).map_err(|e| Failure(AtStatus::Width, e.to_string()))
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length
/// without the terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn at_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// CRC-24 over an 11-byte payload.
///
/// # Safety
/// `payload` must point to 11 readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_crc24(payload: *const u8, out: *mut u32) -> AtStatus {
    guard(|| {
        if payload.is_null() {
            return Err(null("payload"));
        }
        let bytes = std::slice::from_raw_parts(payload, PAYLOAD_BYTES);
        *out_ref(out, "out")? = frame::crc24(bytes)?;
        Ok(())
    })
}

/// Serializes a frame into 14 bytes, computing the parity.
///
/// # Safety
/// `out` must point to 14 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn at_encode_frame(
    df: u8,
    capability: u8,
    icao: u32,
    me: u64,
    out: *mut u8,
) -> AtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let raw = frame::encode_frame(df, capability, icao, me)?;
        ptr::copy_nonoverlapping(raw.0.as_ptr(), out, FRAME_BYTES);
        Ok(())
    })
}

/// Parses 14 bytes, correcting up to `max_correctable` bit errors.
///
/// # Safety
/// `bytes` must point to 14 readable bytes; `out` must be writable;
/// `corrected` may be null.
#[no_mangle]
pub unsafe extern "C" fn at_decode_frame(
    bytes: *const u8,
    max_correctable: u32,
    out: *mut AtFrame,
    corrected: *mut u32,
) -> AtStatus {
    guard(|| {
        if bytes.is_null() {
            return Err(null("bytes"));
        }
        let out = out_ref(out, "out")?;
        let raw = RawFrame::from_slice(std::slice::from_raw_parts(bytes, FRAME_BYTES))?;
        let d = frame::decode_frame(&raw, max_correctable)?;
        *out = AtFrame {
            df: d.frame.df,
            capability: d.frame.capability,
            icao: d.frame.icao,
            me: d.frame.me,
            parity: d.frame.parity,
        };
        if let Some(c) = corrected.as_mut() {
            *c = d.corrected_bits;
        }
        Ok(())
    })
}

/// `F(key)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_f(key: u64, out: *mut u64) -> AtStatus {
    guard(|| {
        *out_ref(out, "out")? = crypto::f(bits50(key)?).value();
        Ok(())
    })
}

/// `G(key)`, the MAC key derived from a chain key.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_g(key: u64, out: *mut u64) -> AtStatus {
    guard(|| {
        *out_ref(out, "out")? = crypto::g(bits50(key)?).bits().value();
        Ok(())
    })
}

/// Truncated tag `HMAC(G(chain_key), message)`.
///
/// # Safety
/// `message` must point to `len` readable bytes (or be null with `len` 0);
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_mac50(
    chain_key: u64,
    message: *const u8,
    len: usize,
    out: *mut u64,
) -> AtStatus {
    guard(|| {
        let msg = if len == 0 {
            &[][..]
        } else if message.is_null() {
            return Err(null("message"));
        } else {
            std::slice::from_raw_parts(message, len)
        };
        let key = crypto::g(bits50(chain_key)?);
        *out_ref(out, "out")? = crypto::hmac50(&key, msg).value();
        Ok(())
    })
}

/// Generates `K_0..=K_n` from a 32-byte seed.
///
/// # Safety
/// `seed` must point to 32 readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_keychain_new(
    seed: *const u8,
    n: u64,
    out: *mut *mut AtKeyChain,
) -> AtStatus {
    guard(|| {
        if seed.is_null() {
            return Err(null("seed"));
        }
        let out = out_ref(out, "out")?;
        let mut s = [0u8; 32];
        ptr::copy_nonoverlapping(seed, s.as_mut_ptr(), 32);
        let chain = KeyChain::generate(Seed(s), n).map_err(invalid)?;
        *out = Box::into_raw(Box::new(AtKeyChain(chain)));
        Ok(())
    })
}

/// # Safety
/// `chain` must be null or a handle from [`at_keychain_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn at_keychain_free(chain: *mut AtKeyChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Key at `index`; index 0 is the public anchor.
///
/// # Safety
/// `chain` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_keychain_key(
    chain: *const AtKeyChain,
    index: u64,
    out: *mut u64,
) -> AtStatus {
    guard(|| {
        let chain = in_ref(chain, "chain")?;
        let key = chain
            .0
            .key(index)
            .ok_or_else(|| invalid("index beyond chain end"))?;
        *out_ref(out, "out")? = key.bits.value();
        Ok(())
    })
}

/// Index of the last key, `n`.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn at_keychain_len(chain: *const AtKeyChain) -> u64 {
    chain.as_ref().map_or(0, |c| c.0.n())
}

/// True iff `F^v(candidate) == trusted`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_verify_chain_link(
    candidate: u64,
    trusted: u64,
    v: u64,
    max_depth: u64,
    out: *mut bool,
) -> AtStatus {
    guard(|| {
        let trusted = ChainKey {
            bits: bits50(trusted)?,
            index: 0,
        };
        let ok = crypto::verify_chain_link(bits50(candidate)?, &trusted, v, max_depth)
            .map_err(invalid)?;
        *out_ref(out, "out")? = ok;
        Ok(())
    })
}

/// Creates a sender with its own copy of `chain`.
///
/// # Safety
/// `chain` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_sender_new(
    icao: u32,
    chain: *const AtKeyChain,
    d: u64,
    interval_len: u64,
    duplicates: u32,
    out: *mut *mut AtSender,
) -> AtStatus {
    guard(|| {
        let chain = in_ref(chain, "chain")?;
        let out = out_ref(out, "out")?;
        let mut cfg = SenderConfig::new(icao, chain.0.clone());
        cfg.schedule = Schedule {
            d,
            interval_len,
            duplicates,
        };
        *out = Box::into_raw(Box::new(AtSender(Sender::new(cfg)?)));
        Ok(())
    })
}

/// # Safety
/// `sender` must be null or a handle from [`at_sender_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn at_sender_free(sender: *mut AtSender) {
    if !sender.is_null() {
        drop(Box::from_raw(sender));
    }
}

/// Frames one call can produce at most: Data, Mac and Key copies.
///
/// # Safety
/// `sender` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn at_sender_max_frames(sender: *const AtSender) -> usize {
    sender
        .as_ref()
        .map_or(0, |s| 3 * s.0.config().schedule.duplicates as usize)
}

unsafe fn write_frames(
    frames: &[frame::Frame],
    out: *mut u8,
    cap_frames: usize,
    count: &mut usize,
) -> Result<(), Failure> {
    if frames.len() > cap_frames {
        return Err(Failure(
            AtStatus::BufferTooSmall,
            format!("need room for {} frames", frames.len()),
        ));
    }
    if !frames.is_empty() && out.is_null() {
        return Err(null("out"));
    }
    for (i, f) in frames.iter().enumerate() {
        ptr::copy_nonoverlapping(f.to_raw().0.as_ptr(), out.add(i * FRAME_BYTES), FRAME_BYTES);
    }
    *count = frames.len();
    Ok(())
}

/// Emits the frames for one 51-bit message into `out` (14 bytes each).
/// `cap_frames` must be at least [`at_sender_max_frames`].
///
/// # Safety
/// `sender` must be a live handle; `out` must point to `cap_frames * 14`
/// writable bytes; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_sender_emit(
    sender: *mut AtSender,
    message: u64,
    out: *mut u8,
    cap_frames: usize,
    count: *mut usize,
) -> AtStatus {
    guard(|| {
        let sender = out_ref(sender, "sender")?;
        let count = out_ref(count, "count")?;
        let need = 3 * sender.0.config().schedule.duplicates as usize;
        if cap_frames < need {
            return Err(Failure(
                AtStatus::BufferTooSmall,
                format!("need room for {need} frames"),
            ));
        }
        let message = Message::new(message).map_err(|e| Failure(AtStatus::Width, e.to_string()))?;
        let frames = sender.0.emit_message(message)?;
        write_frames(&frames, out, cap_frames, count)
    })
}

/// Ends the session, writing the final key disclosure frames.
///
/// # Safety
/// As for [`at_sender_emit`].
#[no_mangle]
pub unsafe extern "C" fn at_sender_finish(
    sender: *mut AtSender,
    out: *mut u8,
    cap_frames: usize,
    count: *mut usize,
) -> AtStatus {
    guard(|| {
        let sender = out_ref(sender, "sender")?;
        let count = out_ref(count, "count")?;
        let need = sender.0.config().schedule.duplicates as usize;
        if cap_frames < need {
            return Err(Failure(
                AtStatus::BufferTooSmall,
                format!("need room for {need} frames"),
            ));
        }
        let frames = sender.0.finish();
        write_frames(&frames, out, cap_frames, count)
    })
}

/// Creates a receiver with default limits and the given schedule.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_receiver_new(
    d: u64,
    interval_len: u64,
    out: *mut *mut AtReceiver,
) -> AtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg = ReceiverConfig {
            schedule: Schedule {
                d,
                interval_len,
                duplicates: 1,
            },
            ..ReceiverConfig::default()
        };
        let inner = Receiver::new(cfg).map_err(invalid)?;
        *out = Box::into_raw(Box::new(AtReceiver {
            inner,
            pending: VecDeque::new(),
        }));
        Ok(())
    })
}

/// # Safety
/// `rx` must be null or a handle from [`at_receiver_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn at_receiver_free(rx: *mut AtReceiver) {
    if !rx.is_null() {
        drop(Box::from_raw(rx));
    }
}

/// Installs the trusted key for `icao`.
///
/// # Safety
/// `rx` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn at_receiver_provision(
    rx: *mut AtReceiver,
    icao: u32,
    anchor: u64,
    anchor_index: u64,
) -> AtStatus {
    guard(|| {
        let rx = out_ref(rx, "rx")?;
        let anchor = ChainKey {
            bits: bits50(anchor)?,
            index: anchor_index,
        };
        rx.inner.provision(icao, anchor).map_err(invalid)
    })
}

/// Feeds one 14-byte frame. Verdicts it produces are queued; `pending`
/// (may be null) receives the queue length.
///
/// # Safety
/// `rx` must be a live handle; `bytes` must point to 14 readable bytes.
#[no_mangle]
pub unsafe extern "C" fn at_receiver_push(
    rx: *mut AtReceiver,
    bytes: *const u8,
    pending: *mut usize,
) -> AtStatus {
    guard(|| {
        let rx = out_ref(rx, "rx")?;
        if bytes.is_null() {
            return Err(null("bytes"));
        }
        let raw = RawFrame::from_slice(std::slice::from_raw_parts(bytes, FRAME_BYTES))?;
        let verdicts = rx.inner.on_raw(&raw);
        rx.pending.extend(verdicts);
        if let Some(p) = pending.as_mut() {
            *p = rx.pending.len();
        }
        Ok(())
    })
}

/// Ends the stream: every buffered message gets its verdict queued.
///
/// # Safety
/// `rx` must be a live handle; `pending` may be null.
#[no_mangle]
pub unsafe extern "C" fn at_receiver_finish(rx: *mut AtReceiver, pending: *mut usize) -> AtStatus {
    guard(|| {
        let rx = out_ref(rx, "rx")?;
        let verdicts = rx.inner.finish();
        rx.pending.extend(verdicts);
        if let Some(p) = pending.as_mut() {
            *p = rx.pending.len();
        }
        Ok(())
    })
}

/// Pops the oldest queued verdict. Returns false when the queue is empty.
///
/// # Safety
/// `rx` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_receiver_next_verdict(
    rx: *mut AtReceiver,
    out: *mut AtVerdict,
) -> bool {
    let (Some(rx), Some(out)) = (rx.as_mut(), out.as_mut()) else {
        return false;
    };
    let Some(v) = rx.pending.pop_front() else {
        return false;
    };
    *out = AtVerdict {
        icao: v.icao,
        seq: v.seq,
        message: v.message.value(),
        status: match v.status {
            Status::Valid => AtVerdictStatus::Valid,
            Status::Invalid => AtVerdictStatus::Invalid,
            Status::DroppedUnsafe => AtVerdictStatus::DroppedUnsafe,
            Status::ExpiredUnpaired => AtVerdictStatus::ExpiredUnpaired,
        },
        interval: v.interval,
    };
    true
}

/// # Safety
/// `rx` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_receiver_summary(
    rx: *const AtReceiver,
    out: *mut AtSummary,
) -> AtStatus {
    guard(|| {
        let rx = in_ref(rx, "rx")?;
        let Summary {
            valid,
            invalid,
            dropped_unsafe,
            expired,
            unverifiable,
            corrupt,
            non_protocol,
            invalid_keys,
        } = rx.inner.summary();
        *out_ref(out, "out")? = AtSummary {
            valid,
            invalid,
            dropped_unsafe,
            expired,
            unverifiable,
            corrupt,
            non_protocol,
            invalid_keys,
        };
        Ok(())
    })
}

/// Single-class collision probability; `period_s` is the time between
/// packets of one aircraft.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_p_collision_single(
    n: u64,
    t_p_us: f64,
    period_s: f64,
    out: *mut f64,
) -> AtStatus {
    guard(|| {
        *out_ref(out, "out")? = sim::p_collision_single(n, t_p_us, period_s).map_err(invalid)?;
        Ok(())
    })
}

/// Mode-S plus ADS-B collision probability at the standard packet lengths
/// and rate, both classes scaled by `rate_multiplier`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn at_p_collision_combined(
    n: u64,
    rate_multiplier: f64,
    include_preamble: bool,
    out: *mut f64,
) -> AtStatus {
    guard(|| {
        let mut params =
            CollisionParams::new(n, vec![TrafficClass::mode_s(), TrafficClass::adsb()]);
        params.rate_multiplier = rate_multiplier;
        params.include_preamble = include_preamble;
        *out_ref(out, "out")? = sim::p_collision_combined(&params).map_err(invalid)?;
        Ok(())
    })
}
