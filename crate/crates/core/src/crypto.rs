//! Key chain and MAC primitives.
//!
//! * `F` walks the chain: `K_{i-1} = F(K_i)`.
//! * `G` derives the MAC key of an interval: `J_i = G(K_i)`.
//! * `hmac50` is HMAC-SHA-256 truncated to its leftmost 50 bits.
//!
//! `F` and `G` are SHA-256 over the 7-byte key packing followed by a
//! one-byte domain separator (`0x00` for `F`, `0x01` for `G`), truncated to
//! 50 bits.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use subtle::ConstantTimeEq;
use thiserror::Error;

use crate::bits::{Bits50, BitsError};

pub const DOMAIN_F: u8 = 0x00;
pub const DOMAIN_G: u8 = 0x01;

pub const BLOCK_SIZE: usize = 64;
pub const OUTER_PAD: u8 = 0x5c;
pub const INNER_PAD: u8 = 0x36;

/// Default bound on chain walks when authenticating a key.
pub const DEFAULT_MAX_CHAIN_DEPTH: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("a key chain needs at least one link")]
    DegenerateChain,
    #[error("chain depth {v} outside 1..={max}")]
    Depth { v: u64, max: u64 },
    #[error(transparent)]
    Bits(#[from] BitsError),
}

fn truncated_hash(key: Bits50, domain: u8) -> Bits50 {
    let mut h = Sha256::new();
    h.update(key.to_bytes());
    h.update([domain]);
    Bits50::from_digest(&h.finalize())
}

/// The chain function `F`.
pub fn f(key: Bits50) -> Bits50 {
    truncated_hash(key, DOMAIN_F)
}

/// `F` applied `times` times.
pub fn f_iter(mut key: Bits50, times: u64) -> Bits50 {
    for _ in 0..times {
        key = f(key);
    }
    key
}

/// Key used for MAC computation. Only obtainable through [`g`], so a chain
/// key can never be used directly as a MAC key.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MacKey(Bits50);

impl MacKey {
    pub fn bits(&self) -> Bits50 {
        self.0
    }
}

impl fmt::Debug for MacKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MacKey({})", self.0.to_hex())
    }
}

/// The MAC-key derivation function `G`.
pub fn g(key: Bits50) -> MacKey {
    MacKey(truncated_hash(key, DOMAIN_G))
}

/// RFC 2104 HMAC over SHA-256. Keys longer than a block are hashed first,
/// shorter keys are zero-padded to the block size.
pub fn hmac_sha256(key: &[u8], message: &[u8]) -> [u8; 32] {
    PreparedMac::from_key_bytes(key).tag(message)
}

/// Full 256-bit tag under a MAC key, before truncation.
pub fn hmac_full(key: &MacKey, message: &[u8]) -> [u8; 32] {
    hmac_sha256(&key.0.to_bytes(), message)
}

/// Leftmost 50 bits of HMAC-SHA-256 keyed with `key`.
pub fn hmac50(key: &MacKey, message: &[u8]) -> Bits50 {
    Bits50::from_digest(&hmac_full(key, message))
}

/// HMAC state with the padded key blocks already absorbed, for verifying
/// many messages under one key.
#[derive(Clone)]
pub struct PreparedMac {
    inner: Sha256,
    outer: Sha256,
}

impl PreparedMac {
    pub fn new(key: &MacKey) -> Self {
        Self::from_key_bytes(&key.0.to_bytes())
    }

    fn from_key_bytes(key: &[u8]) -> Self {
        let mut block = [0u8; BLOCK_SIZE];
        if key.len() > BLOCK_SIZE {
            block[..32].copy_from_slice(&Sha256::digest(key));
        } else {
            block[..key.len()].copy_from_slice(key);
        }
        let mut inner = Sha256::new();
        inner.update(block.map(|b| b ^ INNER_PAD));
        let mut outer = Sha256::new();
        outer.update(block.map(|b| b ^ OUTER_PAD));
        PreparedMac { inner, outer }
    }

    pub fn tag(&self, message: &[u8]) -> [u8; 32] {
        let mut inner = self.inner.clone();
        inner.update(message);
        let mut outer = self.outer.clone();
        outer.update(inner.finalize());
        outer.finalize().into()
    }

    pub fn tag50(&self, message: &[u8]) -> Bits50 {
        Bits50::from_digest(&self.tag(message))
    }
}

impl fmt::Debug for PreparedMac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PreparedMac(..)")
    }
}

/// Constant-time tag equality.
pub fn tags_equal(a: Bits50, b: Bits50) -> bool {
    a.value()
        .to_be_bytes()
        .ct_eq(&b.value().to_be_bytes())
        .into()
}

/// A chain key together with its position in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainKey {
    pub bits: Bits50,
    pub index: u64,
}

/// 256-bit chain seed.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub [u8; 32]);

impl Seed {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Seed(..)")
    }
}

impl FromStr for Seed {
    type Err = BitsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 64 {
            return Err(BitsError::HexLength {
                expected: 64,
                got: s.len(),
            });
        }
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).map_err(|_| BitsError::Hex(s.to_owned()))?;
        Ok(Seed(out))
    }
}

/// Keys `K_0..=K_n`, generated from the seed downwards: `K_n` is the
/// truncated hash of the seed and `K_{i-1} = F(K_i)`. `K_0` is the public
/// anchor and is never used to key a MAC.
#[derive(Clone)]
pub struct KeyChain {
    seed: Seed,
    keys: Vec<Bits50>,
}

impl KeyChain {
    pub fn generate(seed: Seed, n: u64) -> Result<Self, CryptoError> {
        if n == 0 {
            return Err(CryptoError::DegenerateChain);
        }
        let top = Bits50::from_digest(&Sha256::digest(seed.0));
        let mut keys = Vec::with_capacity(n as usize + 1);
        keys.push(top);
        for _ in 0..n {
            let next = f(*keys.last().unwrap());
            keys.push(next);
        }
        keys.reverse();
        Ok(KeyChain { seed, keys })
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    /// Number of `F` links, i.e. the index of the last key.
    pub fn n(&self) -> u64 {
        self.keys.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn key(&self, index: u64) -> Option<ChainKey> {
        self.keys
            .get(index as usize)
            .map(|&bits| ChainKey { bits, index })
    }

    pub fn anchor(&self) -> ChainKey {
        self.key(0).unwrap()
    }

    pub fn keys(&self) -> &[Bits50] {
        &self.keys
    }
}

impl fmt::Debug for KeyChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyChain")
            .field("n", &self.n())
            .field("anchor", &self.keys[0])
            .finish()
    }
}

/// Generates `K_0..=K_n` from `seed`.
pub fn generate_chain(seed: Seed, n: u64) -> Result<KeyChain, CryptoError> {
    KeyChain::generate(seed, n)
}

/// True iff `F^v(candidate) == trusted.bits`.
pub fn verify_chain_link(
    candidate: Bits50,
    trusted: &ChainKey,
    v: u64,
    max_depth: u64,
) -> Result<bool, CryptoError> {
    if v == 0 || v > max_depth {
        return Err(CryptoError::Depth { v, max: max_depth });
    }
    Ok(f_iter(candidate, v) == trusted.bits)
}
