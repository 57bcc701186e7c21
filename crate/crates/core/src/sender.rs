//! Outbound frame schedule of one aircraft.
//!
//! Every message goes out as `duplicates` Data frames followed by
//! `duplicates` Mac frames keyed with `G(K_i)` for the current interval
//! `i`. An interval lasts `interval_len` messages. On entering interval
//! `i` (for `i >= d`), the chain key `K_{i-d}` is broadcast `duplicates`
//! times. Intervals are numbered from 1 because `K_0` is the public anchor.

use thiserror::Error;

use crate::bits::Message;
use crate::crypto::{g, hmac50, KeyChain};
use crate::frame::{AuthPayload, CodecError, Frame, DF_EXTENDED_SQUITTER};

/// Timing parameters shared by sender and receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Schedule {
    /// Key disclosure delay, in intervals.
    pub d: u64,
    /// Messages per key interval.
    pub interval_len: u64,
    /// Copies of each protocol frame.
    pub duplicates: u32,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            d: 10,
            interval_len: 10,
            duplicates: 2,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<(), SenderError> {
        if self.d == 0 || self.interval_len == 0 || self.duplicates == 0 {
            return Err(SenderError::Config(
                "d, interval_len and duplicates must all be at least 1",
            ));
        }
        Ok(())
    }

    /// Chain length needed to sign `messages` messages.
    pub fn chain_length_for(&self, messages: u64) -> u64 {
        messages.div_ceil(self.interval_len).max(1)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SenderError {
    #[error("key chain exhausted at interval {interval} (chain has {available} keys)")]
    ChainExhausted { interval: u64, available: u64 },
    #[error("invalid sender configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone)]
pub struct SenderConfig {
    pub icao: u32,
    pub capability: u8,
    pub df: u8,
    pub schedule: Schedule,
    pub chain: KeyChain,
}

impl SenderConfig {
    pub fn new(icao: u32, chain: KeyChain) -> Self {
        SenderConfig {
            icao,
            capability: 5,
            df: DF_EXTENDED_SQUITTER,
            schedule: Schedule::default(),
            chain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SenderState {
    pub current_interval: u64,
    pub packets_sent_in_interval: u64,
    pub next_message_seq: u64,
}

#[derive(Debug, Clone)]
pub struct Sender {
    config: SenderConfig,
    state: SenderState,
    finished: bool,
}

impl Sender {
    pub fn new(config: SenderConfig) -> Result<Self, SenderError> {
        config.schedule.validate()?;
        // Validates icao/capability/df widths once.
        Frame::new(config.df, config.capability, config.icao, 0)?;
        Ok(Sender {
            config,
            state: SenderState {
                current_interval: 1,
                packets_sent_in_interval: 0,
                next_message_seq: 0,
            },
            finished: false,
        })
    }

    pub fn config(&self) -> &SenderConfig {
        &self.config
    }

    pub fn state(&self) -> SenderState {
        self.state
    }

    fn frame(&self, payload: AuthPayload) -> Frame {
        Frame::new(
            self.config.df,
            self.config.capability,
            self.config.icao,
            crate::frame::pack_payload(&payload),
        )
        .expect("fields validated at construction")
    }

    fn copies(&self, frame: Frame, out: &mut Vec<Frame>) {
        out.extend(std::iter::repeat_n(
            frame,
            self.config.schedule.duplicates as usize,
        ));
    }

    /// Data and Mac frames for one message, plus key disclosure frames if
    /// this message closes the interval.
    pub fn emit_message(&mut self, message: Message) -> Result<Vec<Frame>, SenderError> {
        if self.finished {
            return Err(SenderError::Config("session already finished"));
        }
        let interval = self.state.current_interval;
        let key = self
            .config
            .chain
            .key(interval)
            .ok_or(SenderError::ChainExhausted {
                interval,
                available: self.config.chain.n(),
            })?;
        let tag = hmac50(&g(key.bits), &message.to_bytes());

        let mut out = Vec::new();
        self.copies(self.frame(AuthPayload::Data(message)), &mut out);
        self.copies(self.frame(AuthPayload::Mac(tag)), &mut out);

        self.state.next_message_seq += 1;
        self.state.packets_sent_in_interval += 1;
        if self.state.packets_sent_in_interval == self.config.schedule.interval_len {
            self.advance_interval(&mut out);
        }
        Ok(out)
    }

    fn advance_interval(&mut self, out: &mut Vec<Frame>) {
        self.state.current_interval += 1;
        self.state.packets_sent_in_interval = 0;
        out.extend(self.disclose_key());
    }

    /// Key frames carrying `K_{i-d}` for the current interval `i`; empty
    /// before interval `d`.
    pub fn disclose_key(&self) -> Vec<Frame> {
        let i = self.state.current_interval;
        let d = self.config.schedule.d;
        if i < d {
            return Vec::new();
        }
        let Some(key) = self.config.chain.key(i - d) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        self.copies(self.frame(AuthPayload::Key(key.bits)), &mut out);
        out
    }

    /// Ends the session by disclosing the newest key that carried a MAC.
    /// Older undisclosed keys follow from it through `F`, so one disclosure
    /// is enough; afterwards the state sits in the interval where that key
    /// is due.
    pub fn finish(&mut self) -> Vec<Frame> {
        let last_keyed = if self.state.packets_sent_in_interval > 0 {
            self.state.current_interval
        } else {
            self.state.current_interval - 1
        };
        let due = last_keyed + self.config.schedule.d;
        let already = std::mem::replace(&mut self.finished, true);
        if already || last_keyed == 0 || self.state.current_interval >= due {
            return Vec::new();
        }
        self.state.current_interval = due;
        self.state.packets_sent_in_interval = 0;
        self.disclose_key()
    }
}
