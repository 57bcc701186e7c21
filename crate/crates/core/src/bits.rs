//! Fixed-width bit strings used throughout the protocol.
//!
//! All values are stored right-aligned in a `u64` and serialized
//! most-significant-bit first.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitsError {
    #[error("value {value:#x} does not fit in {width} bits")]
    Width { value: u64, width: u32 },
    #[error("expected {expected} hex characters, got {got}")]
    HexLength { expected: usize, got: usize },
    #[error("invalid hex string: {0}")]
    Hex(String),
    #[error("hex value has non-zero padding bits")]
    Padding,
}

pub(crate) const fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

pub(crate) fn check_width(value: u64, width: u32) -> Result<u64, BitsError> {
    if value & !mask(width) != 0 {
        Err(BitsError::Width { value, width })
    } else {
        Ok(value)
    }
}

/// A 50-bit string: chain keys, MAC keys and truncated tags.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits50(u64);

impl Bits50 {
    pub const WIDTH: u32 = 50;
    pub const ZERO: Bits50 = Bits50(0);

    pub fn new(value: u64) -> Result<Self, BitsError> {
        check_width(value, Self::WIDTH).map(Bits50)
    }

    /// Keeps the low 50 bits of `value`.
    pub const fn truncate(value: u64) -> Self {
        Bits50(value & mask(Self::WIDTH))
    }

    pub const fn value(self) -> u64 {
        self.0
    }

    /// Leftmost 50 bits of a digest.
    pub fn from_digest(digest: &[u8]) -> Self {
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        Bits50(u64::from_be_bytes(head) >> (64 - Self::WIDTH))
    }

    /// MSB-first packing into 7 bytes; the low 6 bits of the last byte are zero.
    pub fn to_bytes(self) -> [u8; 7] {
        let word = (self.0 << (56 - Self::WIDTH)).to_be_bytes();
        let mut out = [0u8; 7];
        out.copy_from_slice(&word[1..]);
        out
    }

    /// 13 lowercase hex characters: the value shifted left by two bits.
    pub fn to_hex(self) -> String {
        format!("{:013x}", self.0 << 2)
    }

    pub fn from_hex(s: &str) -> Result<Self, BitsError> {
        let raw = parse_hex_u64(s, 13)?;
        if raw & 0b11 != 0 {
            return Err(BitsError::Padding);
        }
        Ok(Bits50(raw >> 2))
    }
}

impl fmt::Debug for Bits50 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits50({})", self.to_hex())
    }
}

impl fmt::Display for Bits50 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Bits50 {
    type Err = BitsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_hex(s)
    }
}

/// The 51-bit application message carried by a Data payload.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Message(u64);

impl Message {
    pub const WIDTH: u32 = 51;
    pub const ZERO: Message = Message(0);

    pub fn new(value: u64) -> Result<Self, BitsError> {
        check_width(value, Self::WIDTH).map(Message)
    }

    pub const fn truncate(value: u64) -> Self {
        Message(value & mask(Self::WIDTH))
    }

    pub const fn value(self) -> u64 {
        self.0
    }

    /// Bytes fed to the MAC: MSB-first into 7 bytes, low 5 bits of the last byte zero.
    pub fn to_bytes(self) -> [u8; 7] {
        let word = (self.0 << (56 - Self::WIDTH)).to_be_bytes();
        let mut out = [0u8; 7];
        out.copy_from_slice(&word[1..]);
        out
    }

    /// 13 lowercase hex characters holding the message left-aligned in 52 bits.
    pub fn to_hex(self) -> String {
        format!("{:013x}", self.0 << 1)
    }

    pub fn from_hex(s: &str) -> Result<Self, BitsError> {
        let raw = parse_hex_u64(s, 13)?;
        if raw & 1 != 0 {
            return Err(BitsError::Padding);
        }
        Ok(Message(raw >> 1))
    }
}

impl fmt::Debug for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Message({})", self.to_hex())
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Message {
    type Err = BitsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_hex(s)
    }
}

pub(crate) fn parse_hex_u64(s: &str, digits: usize) -> Result<u64, BitsError> {
    if s.len() != digits {
        return Err(BitsError::HexLength {
            expected: digits,
            got: s.len(),
        });
    }
    if !s.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(BitsError::Hex(s.to_owned()));
    }
    u64::from_str_radix(s, 16).map_err(|_| BitsError::Hex(s.to_owned()))
}
