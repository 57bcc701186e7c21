//! Delayed-key-disclosure (TESLA-style) authentication for ADS-B
//! Extended Squitter broadcasts.
//!
//! Each aircraft tags its messages with truncated HMACs under keys from a
//! one-way hash chain and reveals every key `d` intervals after using it.
//! Receivers holding one trusted chain key check that a tag arrived before
//! its key could have been public, then verify it once the key shows up.
//!
//! ```
//! use adsb_tesla::{KeyChain, Message, Receiver, ReceiverConfig, Seed, Sender, SenderConfig, Status};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let chain = KeyChain::generate(Seed([7; 32]), 100)?;
//! let mut rx = Receiver::new(ReceiverConfig::default())?;
//! rx.provision(0x4CA123, chain.anchor())?;
//!
//! let mut tx = Sender::new(SenderConfig::new(0x4CA123, chain))?;
//! let mut verdicts = Vec::new();
//! for m in 0..50u64 {
//!     for frame in tx.emit_message(Message::truncate(m))? {
//!         verdicts.extend(rx.on_frame(&frame));
//!     }
//! }
//! for frame in tx.finish() {
//!     verdicts.extend(rx.on_frame(&frame));
//! }
//! verdicts.extend(rx.finish());
//! assert!(verdicts.len() == 50 && verdicts.iter().all(|v| v.status == Status::Valid));
//! # Ok(())
//! # }
//! ```

pub mod bits;
pub mod cli;
pub mod crypto;
pub mod frame;
pub mod receiver;
pub mod sender;
pub mod sim;

pub use bits::{Bits50, BitsError, Message};
pub use crypto::{ChainKey, CryptoError, KeyChain, MacKey, Seed};
pub use frame::{decode_frame, encode_frame, AuthPayload, CodecError, Frame, RawFrame};
pub use receiver::{Receiver, ReceiverConfig, ReceiverError, ReceiverState, Status, Verdict};
pub use sender::{Schedule, Sender, SenderConfig, SenderError};
