//! 112-bit Extended Squitter frames: field packing, CRC-24 parity,
//! bounded error correction, and the authentication payloads carried in
//! the 56-bit ME field.
//!
//! Layout, MSB first: `DF(5) | CA(3) | ICAO(24) | ME(56) | PI(24)`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bits::{check_width, mask, Bits50, BitsError, Message};

/// Downlink format of an ADS-B Extended Squitter (decimal 17).
pub const DF_EXTENDED_SQUITTER: u8 = 17;
/// The literal `0x17` value, for captures that follow that reading.
pub const DF_EXTENDED_SQUITTER_HEX_LITERAL: u8 = 0x17;

/// Mode-S generator polynomial, low 24 coefficients (x^24 implied).
pub const GENERATOR: u32 = 0xFF_F409;

pub const FRAME_BITS: usize = 112;
pub const FRAME_BYTES: usize = 14;
pub const PAYLOAD_BYTES: usize = 11;

/// Upper bound accepted for `max_correctable`.
pub const MAX_CORRECTABLE_LIMIT: u32 = 5;

/// Type Codes assigned to protocol payloads (reserved ADS-B codes).
pub const TC_DATA: u8 = 25;
pub const TC_MAC: u8 = 26;
pub const TC_KEY: u8 = 27;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("field `{field}` value {value:#x} exceeds {width} bits")]
    Width {
        field: &'static str,
        value: u64,
        width: u32,
    },
    #[error("expected {expected} bytes, got {got}")]
    Length { expected: usize, got: usize },
    #[error("max_correctable {0} exceeds the supported limit of 5")]
    CorrectionLimit(u32),
    #[error("frame failed parity check (syndrome {syndrome:#08x})")]
    Integrity { syndrome: u32 },
    #[error("unknown payload type code {0}")]
    UnknownPayload(u8),
    #[error("payload padding bits are not zero")]
    Padding,
    #[error("malformed capture line: {0}")]
    Capture(String),
}

const fn build_crc_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = (i as u32) << 16;
        let mut bit = 0;
        while bit < 8 {
            c = if c & 0x80_0000 != 0 {
                (c << 1) ^ GENERATOR
            } else {
                c << 1
            };
            bit += 1;
        }
        table[i] = c & 0xFF_FFFF;
        i += 1;
    }
    table
}

static CRC_TABLE: [u32; 256] = build_crc_table();

fn crc24_bytes(bytes: &[u8]) -> u32 {
    bytes.iter().fold(0u32, |crc, &b| {
        let idx = (((crc >> 16) as u8) ^ b) as usize;
        ((crc << 8) ^ CRC_TABLE[idx]) & 0xFF_FFFF
    })
}

/// CRC-24 parity of the first 88 bits of a frame.
pub fn crc24(payload: &[u8]) -> Result<u32, CodecError> {
    if payload.len() != PAYLOAD_BYTES {
        return Err(CodecError::Length {
            expected: PAYLOAD_BYTES,
            got: payload.len(),
        });
    }
    Ok(crc24_bytes(payload))
}

/// A serialized 112-bit frame.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct RawFrame(pub [u8; FRAME_BYTES]);

impl RawFrame {
    pub fn from_slice(bytes: &[u8]) -> Result<Self, CodecError> {
        let arr: [u8; FRAME_BYTES] = bytes.try_into().map_err(|_| CodecError::Length {
            expected: FRAME_BYTES,
            got: bytes.len(),
        })?;
        Ok(RawFrame(arr))
    }

    pub fn as_bytes(&self) -> &[u8; FRAME_BYTES] {
        &self.0
    }

    /// Bit `pos` (0 = first transmitted bit).
    pub fn bit(&self, pos: usize) -> bool {
        self.0[pos / 8] & (0x80 >> (pos % 8)) != 0
    }

    pub fn flip_bit(&mut self, pos: usize) {
        self.0[pos / 8] ^= 0x80 >> (pos % 8);
    }

    /// `crc24(first 88 bits) ^ parity`; zero for a well-formed frame.
    pub fn syndrome(&self) -> u32 {
        let parity = u32::from_be_bytes([0, self.0[11], self.0[12], self.0[13]]);
        crc24_bytes(&self.0[..PAYLOAD_BYTES]) ^ parity
    }

    fn as_u128(&self) -> u128 {
        let mut wide = [0u8; 16];
        wide[2..].copy_from_slice(&self.0);
        u128::from_be_bytes(wide)
    }

    fn from_u128(v: u128) -> Self {
        let wide = v.to_be_bytes();
        let mut out = [0u8; FRAME_BYTES];
        out.copy_from_slice(&wide[2..]);
        RawFrame(out)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for RawFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RawFrame({})", self.to_hex())
    }
}

impl fmt::Display for RawFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for RawFrame {
    type Err = CodecError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != FRAME_BYTES * 2 {
            return Err(CodecError::Capture(format!(
                "expected 28 hex characters, got {}",
                s.len()
            )));
        }
        let bytes = hex::decode(s).map_err(|e| CodecError::Capture(e.to_string()))?;
        RawFrame::from_slice(&bytes)
    }
}

/// A parsed Extended Squitter frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Frame {
    pub df: u8,
    pub capability: u8,
    pub icao: u32,
    /// 56-bit ME field, right-aligned.
    pub me: u64,
    pub parity: u32,
}

fn field(name: &'static str, value: u64, width: u32) -> Result<u64, CodecError> {
    check_width(value, width).map_err(|_| CodecError::Width {
        field: name,
        value,
        width,
    })
}

impl Frame {
    /// Builds a frame and computes its parity.
    pub fn new(df: u8, capability: u8, icao: u32, me: u64) -> Result<Self, CodecError> {
        field("df", df.into(), 5)?;
        field("capability", capability.into(), 3)?;
        field("icao", icao.into(), 24)?;
        field("me", me, 56)?;
        let mut frame = Frame {
            df,
            capability,
            icao,
            me,
            parity: 0,
        };
        frame.parity = crc24_bytes(&frame.header_and_me());
        Ok(frame)
    }

    fn header_and_me(&self) -> [u8; PAYLOAD_BYTES] {
        let word: u128 = (u128::from(self.df) << 83)
            | (u128::from(self.capability) << 80)
            | (u128::from(self.icao) << 56)
            | u128::from(self.me);
        let wide = word.to_be_bytes();
        let mut out = [0u8; PAYLOAD_BYTES];
        out.copy_from_slice(&wide[5..]);
        out
    }

    pub fn to_raw(&self) -> RawFrame {
        let mut out = [0u8; FRAME_BYTES];
        out[..PAYLOAD_BYTES].copy_from_slice(&self.header_and_me());
        out[PAYLOAD_BYTES..].copy_from_slice(&self.parity.to_be_bytes()[1..]);
        RawFrame(out)
    }

    /// Splits the raw fields without checking parity.
    pub fn parse_unchecked(raw: &RawFrame) -> Frame {
        let v = raw.as_u128();
        Frame {
            df: ((v >> 107) & 0x1f) as u8,
            capability: ((v >> 104) & 0x7) as u8,
            icao: ((v >> 80) & 0xFF_FFFF) as u32,
            me: ((v >> 24) as u64) & mask(56),
            parity: (v & 0xFF_FFFF) as u32,
        }
    }

    pub fn type_code(&self) -> u8 {
        (self.me >> 51) as u8
    }

    pub fn payload(&self) -> Result<AuthPayload, CodecError> {
        unpack_payload(self.me)
    }
}

/// Serializes the four fields into 112 bits with parity over the first 88.
pub fn encode_frame(df: u8, capability: u8, icao: u32, me: u64) -> Result<RawFrame, CodecError> {
    Frame::new(df, capability, icao, me).map(|f| f.to_raw())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decoded {
    pub frame: Frame,
    pub corrected_bits: u32,
    /// The frame after correction.
    pub raw: RawFrame,
}

// Syndrome produced by a single flipped bit at each position.
fn single_bit_syndromes() -> &'static [u32; FRAME_BITS] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[u32; FRAME_BITS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0u32; FRAME_BITS];
        for (pos, slot) in table.iter_mut().enumerate() {
            let mut raw = RawFrame([0; FRAME_BYTES]);
            raw.flip_bit(pos);
            *slot = raw.syndrome();
        }
        table
    })
}

// Multiply a residue by x^-1 modulo the generator.
fn mul_x_inverse(s: u32) -> u32 {
    if s & 1 == 0 {
        s >> 1
    } else {
        ((s ^ GENERATOR) >> 1) | 0x80_0000
    }
}

// Error mask (bit 0 = last transmitted bit) of the unique lowest-weight
// pattern confined to a 24-bit window that explains `syndrome`, if its
// weight is within `max_weight` and no other window gives a different
// pattern of the same weight.
fn burst_correction(syndrome: u32, max_weight: u32) -> Option<(u128, u32)> {
    let mut best: Option<(u128, u32)> = None;
    let mut ambiguous = false;
    let mut residue = syndrome;
    for shift in 0..=(FRAME_BITS - 24) {
        let weight = residue.count_ones();
        if weight <= max_weight {
            let pattern = u128::from(residue) << shift;
            match best {
                Some((p, w)) if weight == w && pattern != p => ambiguous = true,
                Some((_, w)) if weight >= w => {}
                _ => {
                    best = Some((pattern, weight));
                    ambiguous = false;
                }
            }
        }
        residue = mul_x_inverse(residue);
    }
    if ambiguous {
        None
    } else {
        best
    }
}

/// Checks parity and, if needed, corrects up to `max_correctable` bit errors.
///
/// A single-bit error is located through the precomputed syndrome table.
/// With `max_correctable > 1` the search is restricted to error patterns
/// that fit inside one 24-bit window; ambiguous syndromes are rejected.
pub fn decode_frame(raw: &RawFrame, max_correctable: u32) -> Result<Decoded, CodecError> {
    if max_correctable > MAX_CORRECTABLE_LIMIT {
        return Err(CodecError::CorrectionLimit(max_correctable));
    }
    let syndrome = raw.syndrome();
    if syndrome == 0 {
        return Ok(Decoded {
            frame: Frame::parse_unchecked(raw),
            corrected_bits: 0,
            raw: *raw,
        });
    }
    let integrity = CodecError::Integrity { syndrome };
    let fixed = match max_correctable {
        0 => return Err(integrity),
        1 => {
            let pos = single_bit_syndromes()
                .iter()
                .position(|&s| s == syndrome)
                .ok_or(integrity)?;
            let mut fixed = *raw;
            fixed.flip_bit(pos);
            (fixed, 1)
        }
        n => {
            let (pattern, weight) = burst_correction(syndrome, n).ok_or(integrity)?;
            (RawFrame::from_u128(raw.as_u128() ^ pattern), weight)
        }
    };
    debug_assert_eq!(fixed.0.syndrome(), 0);
    Ok(Decoded {
        frame: Frame::parse_unchecked(&fixed.0),
        corrected_bits: fixed.1,
        raw: fixed.0,
    })
}

/// Payload carried in the ME field by the authentication protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AuthPayload {
    Data(Message),
    Mac(Bits50),
    Key(Bits50),
}

impl AuthPayload {
    pub fn type_code(&self) -> u8 {
        match self {
            AuthPayload::Data(_) => TC_DATA,
            AuthPayload::Mac(_) => TC_MAC,
            AuthPayload::Key(_) => TC_KEY,
        }
    }
}

/// Packs a payload: Type Code in the top 5 bits, body left-aligned after it.
pub fn pack_payload(payload: &AuthPayload) -> u64 {
    let tc = u64::from(payload.type_code()) << 51;
    match payload {
        AuthPayload::Data(m) => tc | m.value(),
        AuthPayload::Mac(b) | AuthPayload::Key(b) => tc | (b.value() << 1),
    }
}

/// Packs a payload from a Type Code and a raw body, checking the body width.
pub fn pack_raw(type_code: u8, body: u64) -> Result<u64, CodecError> {
    let width = |w: u32| {
        check_width(body, w).map_err(|_| CodecError::Width {
            field: "body",
            value: body,
            width: w,
        })
    };
    let payload = match type_code {
        TC_DATA => AuthPayload::Data(Message::truncate(width(51)?)),
        TC_MAC => AuthPayload::Mac(Bits50::truncate(width(50)?)),
        TC_KEY => AuthPayload::Key(Bits50::truncate(width(50)?)),
        other => return Err(CodecError::UnknownPayload(other)),
    };
    Ok(pack_payload(&payload))
}

pub fn unpack_payload(me: u64) -> Result<AuthPayload, CodecError> {
    field("me", me, 56)?;
    let tc = (me >> 51) as u8;
    let body = me & mask(51);
    match tc {
        TC_DATA => Ok(AuthPayload::Data(Message::truncate(body))),
        TC_MAC | TC_KEY => {
            if body & 1 != 0 {
                return Err(CodecError::Padding);
            }
            let bits = Bits50::truncate(body >> 1);
            Ok(if tc == TC_MAC {
                AuthPayload::Mac(bits)
            } else {
                AuthPayload::Key(bits)
            })
        }
        other => Err(CodecError::UnknownPayload(other)),
    }
}

/// One line of the hex capture format: `<28 hex>[;<timestamp_us>]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaptureLine {
    pub raw: RawFrame,
    pub timestamp_us: Option<u64>,
}

impl CaptureLine {
    pub fn new(raw: RawFrame) -> Self {
        CaptureLine {
            raw,
            timestamp_us: None,
        }
    }
}

impl fmt::Display for CaptureLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.timestamp_us {
            Some(ts) => write!(f, "{};{}", self.raw, ts),
            None => write!(f, "{}", self.raw),
        }
    }
}

impl FromStr for CaptureLine {
    type Err = CodecError;
    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let line = line.trim();
        let (frame, ts) = match line.split_once(';') {
            Some((frame, ts)) => {
                let ts = ts
                    .parse::<u64>()
                    .map_err(|_| CodecError::Capture(format!("bad timestamp `{ts}`")))?;
                (frame, Some(ts))
            }
            None => (line, None),
        };
        Ok(CaptureLine {
            raw: frame.parse()?,
            timestamp_us: ts,
        })
    }
}

impl From<BitsError> for CodecError {
    fn from(e: BitsError) -> Self {
        match e {
            BitsError::Width { value, width } => CodecError::Width {
                field: "body",
                value,
                width,
            },
            other => CodecError::Capture(other.to_string()),
        }
    }
}
