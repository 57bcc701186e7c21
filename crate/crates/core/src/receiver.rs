//! Receiver side of the protocol: buffering, key authentication, the
//! disclosure safety condition, and MAC verification.
//!
//! Frames carry no interval index, so each [`ReceiverState`] tracks the
//! sender's schedule with an [`IntervalClock`]: it counts logical messages
//! (duplicate copies absorbed) and resynchronizes whenever an authentic key
//! `K_m` arrives, which the sender broadcasts on entering interval `m + d`.
//!
//! A buffered message is checked against the MAC keys of a window of
//! candidate intervals around the clock reading at its arrival. A tag that
//! matches under interval `i` is accepted only if the key of `i` could not
//! yet have been disclosed when the tag arrived, i.e. `arrival < i + d`.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{Bits50, Message};
use crate::crypto::{f, g, tags_equal, ChainKey, PreparedMac, DEFAULT_MAX_CHAIN_DEPTH};
use crate::frame::{decode_frame, AuthPayload, Frame, RawFrame, DF_EXTENDED_SQUITTER};
use crate::sender::Schedule;

/// Distinct tags kept per buffered message.
pub const MAX_TAGS_PER_ENTRY: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReceiverError {
    #[error("key {key} does not chain to the newest authenticated key within {depth} steps")]
    InvalidKey { key: Bits50, depth: u64 },
    #[error("invalid receiver configuration: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverConfig {
    /// Must match the sender's schedule (`duplicates` is not used).
    pub schedule: Schedule,
    pub max_chain_depth: u64,
    pub max_buffer: usize,
    /// Intervals past the clock reading that a message may belong to.
    pub lookahead: u64,
    /// Bit errors corrected when decoding raw frames.
    pub max_correctable: u32,
    /// Extra intervals by which a tag must beat its key's disclosure.
    /// Covers a clock that fell behind after lost frames; capped at `d - 1`.
    #[serde(default = "default_guard")]
    pub guard_intervals: u64,
    pub df: u8,
}

fn default_guard() -> u64 {
    1
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        ReceiverConfig {
            schedule: Schedule::default(),
            max_chain_depth: DEFAULT_MAX_CHAIN_DEPTH,
            max_buffer: 256,
            lookahead: 2,
            max_correctable: 1,
            guard_intervals: default_guard(),
            df: DF_EXTENDED_SQUITTER,
        }
    }
}

impl ReceiverConfig {
    pub fn validate(&self) -> Result<(), ReceiverError> {
        if self.schedule.d == 0 || self.schedule.interval_len == 0 {
            return Err(ReceiverError::Config(
                "d and interval_len must be at least 1",
            ));
        }
        if self.max_chain_depth == 0 || self.max_buffer == 0 {
            return Err(ReceiverError::Config(
                "max_chain_depth and max_buffer must be at least 1",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Valid,
    Invalid,
    DroppedUnsafe,
    ExpiredUnpaired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub icao: u32,
    /// Per-sender order in which the message was first seen.
    pub seq: u64,
    pub message: Message,
    pub status: Status,
    /// Interval the tag verified under for `Valid` and `DroppedUnsafe`;
    /// otherwise the clock reading when the message arrived.
    pub interval: u64,
}

/// The receiver's estimate of the sender's position in its schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalClock {
    pub interval: u64,
    /// Logical messages seen in `interval`.
    pub slots: u64,
}

impl IntervalClock {
    fn tick(&mut self, interval_len: u64) {
        if self.slots >= interval_len {
            self.interval += 1;
            self.slots = 1;
        } else {
            self.slots += 1;
        }
    }
}

/// `true` iff the key of `entry_interval` cannot have been published at
/// `arrival_interval`. Keys are disclosed on entering interval `i + d`, so
/// a tag arriving in that interval or later is unsafe.
pub fn is_safe(arrival_interval: u64, entry_interval: u64, d: u64) -> bool {
    arrival_interval < entry_interval + d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReceivedTag {
    pub tag: Bits50,
    pub arrival_interval: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BufferedEntry {
    pub seq: u64,
    pub message: Message,
    /// Clock reading when the Data frame arrived.
    pub interval: u64,
    pub tags: Vec<ReceivedTag>,
    /// Arrival order among all protocol frames of this sender.
    pub arrival_order: u64,
    next_candidate: u64,
    unsafe_match: Option<u64>,
}

impl BufferedEntry {
    fn is_paired(&self) -> bool {
        !self.tags.is_empty()
    }
}

/// What [`ReceiverState::accept_key`] did with a candidate key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyOutcome {
    /// New newest key at this index.
    Advanced(u64),
    /// Same as the newest key.
    Current(u64),
    /// An already known older key; ignored.
    Stale(u64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenderCounters {
    pub invalid_keys: u64,
    pub orphan_macs: u64,
    pub excess_macs: u64,
    pub evicted: u64,
}

/// Verification state for one sender (ICAO address).
#[derive(Debug, Clone)]
pub struct ReceiverState {
    icao: u32,
    config: ReceiverConfig,
    anchor: ChainKey,
    newest_key: ChainKey,
    /// Protocol frames received from this sender.
    l: u64,
    clock: IntervalClock,
    buffer: VecDeque<BufferedEntry>,
    /// The last buffered entry still accepts Mac frames.
    open: bool,
    last_orphan: Option<Bits50>,
    // Authenticated keys for indices `key_base..=newest_key.index`.
    keys: VecDeque<Bits50>,
    key_base: u64,
    mac_keys: BTreeMap<u64, PreparedMac>,
    next_seq: u64,
    counters: SenderCounters,
}

impl ReceiverState {
    pub fn new(icao: u32, anchor: ChainKey, config: ReceiverConfig) -> Result<Self, ReceiverError> {
        config.validate()?;
        Ok(ReceiverState {
            icao,
            config,
            anchor,
            newest_key: anchor,
            l: 0,
            clock: IntervalClock {
                interval: anchor.index + 1,
                slots: 0,
            },
            buffer: VecDeque::new(),
            open: false,
            last_orphan: None,
            keys: VecDeque::from([anchor.bits]),
            key_base: anchor.index,
            mac_keys: BTreeMap::new(),
            next_seq: 0,
            counters: SenderCounters::default(),
        })
    }

    pub fn icao(&self) -> u32 {
        self.icao
    }

    pub fn anchor(&self) -> ChainKey {
        self.anchor
    }

    pub fn newest_key(&self) -> ChainKey {
        self.newest_key
    }

    pub fn packets_received(&self) -> u64 {
        self.l
    }

    pub fn clock(&self) -> IntervalClock {
        self.clock
    }

    pub fn buffer(&self) -> &VecDeque<BufferedEntry> {
        &self.buffer
    }

    pub fn counters(&self) -> SenderCounters {
        self.counters
    }

    fn d(&self) -> u64 {
        self.config.schedule.d
    }

    fn guard(&self) -> u64 {
        self.config.guard_intervals.min(self.d() - 1)
    }

    /// Whether a tag for `entry_interval` arriving now would be safe.
    pub fn safety_check(&self, entry_interval: u64) -> bool {
        is_safe(self.clock.interval + self.guard(), entry_interval, self.d())
    }

    fn candidates(&self, entry: &BufferedEntry) -> (u64, u64) {
        let lo = entry
            .interval
            .saturating_sub(self.d())
            .max(self.anchor.index + 1);
        (lo, entry.interval + self.config.lookahead)
    }

    /// Authenticated key at `index`, if `index <= newest`.
    pub fn key_at(&self, index: u64) -> Option<Bits50> {
        if index > self.newest_key.index {
            return None;
        }
        if index >= self.key_base {
            return Some(self.keys[(index - self.key_base) as usize]);
        }
        let mut k = self.keys[0];
        for _ in index..self.key_base {
            k = f(k);
        }
        Some(k)
    }

    fn retain_keys(&self) -> u64 {
        self.config.max_chain_depth + self.d() + self.config.lookahead + 1
    }

    /// Authenticates `candidate` against the newest key by walking `F` up to
    /// `max_chain_depth` steps. Returns the resulting newest index.
    pub fn accept_key(&mut self, candidate: Bits50) -> Result<u64, ReceiverError> {
        self.classify_key(candidate).map(|outcome| match outcome {
            KeyOutcome::Advanced(i) | KeyOutcome::Current(i) => i,
            KeyOutcome::Stale(_) => self.newest_key.index,
        })
    }

    pub fn classify_key(&mut self, candidate: Bits50) -> Result<KeyOutcome, ReceiverError> {
        if candidate == self.newest_key.bits {
            return Ok(KeyOutcome::Current(self.newest_key.index));
        }
        if let Some(pos) = self.keys.iter().position(|&k| k == candidate) {
            return Ok(KeyOutcome::Stale(self.key_base + pos as u64));
        }
        let mut walk = Vec::new();
        let mut k = candidate;
        for v in 1..=self.config.max_chain_depth {
            walk.push(k);
            k = f(k);
            if k == self.newest_key.bits {
                // walk = [F^0(c), .., F^{v-1}(c)] at indices newest+v ..= newest+1
                self.keys.extend(walk.iter().rev());
                let index = self.newest_key.index + v;
                self.newest_key = ChainKey {
                    bits: candidate,
                    index,
                };
                let retain = self.retain_keys();
                while self.keys.len() as u64 > retain {
                    self.keys.pop_front();
                    self.key_base += 1;
                }
                return Ok(KeyOutcome::Advanced(index));
            }
        }
        self.counters.invalid_keys += 1;
        Err(ReceiverError::InvalidKey {
            key: candidate,
            depth: self.config.max_chain_depth,
        })
    }

    fn mac_key(&mut self, index: u64) -> &PreparedMac {
        if !self.mac_keys.contains_key(&index) {
            let key = self
                .key_at(index)
                .expect("index checked against newest key");
            self.mac_keys.insert(index, PreparedMac::new(&g(key)));
        }
        &self.mac_keys[&index]
    }

    fn verdict(&self, entry: &BufferedEntry, status: Status, interval: u64) -> Verdict {
        Verdict {
            icao: self.icao,
            seq: entry.seq,
            message: entry.message,
            status,
            interval,
        }
    }

    /// Verifies every paired entry whose candidate keys are now known.
    /// A match under a safe interval gives `Valid`; once all candidates
    /// are exhausted the entry becomes `DroppedUnsafe` (a match, but only
    /// after disclosure) or `Invalid`.
    pub fn authenticate_buffered(&mut self) -> Vec<Verdict> {
        let newest = self.newest_key.index;
        let d = self.d();
        let guard = self.guard();
        let mut verdicts = Vec::new();
        let mut i = 0;
        while i < self.buffer.len() {
            let open_last = self.open && i + 1 == self.buffer.len();
            if !self.buffer[i].is_paired() || open_last {
                i += 1;
                continue;
            }
            let (_, hi) = self.candidates(&self.buffer[i]);
            let mut valid = None;
            while self.buffer[i].next_candidate <= hi.min(newest) {
                let candidate = self.buffer[i].next_candidate;
                let bytes = self.buffer[i].message.to_bytes();
                let rmac = self.mac_key(candidate).tag50(&bytes);
                let entry = &mut self.buffer[i];
                for t in &entry.tags {
                    if tags_equal(rmac, t.tag) {
                        if is_safe(t.arrival_interval + guard, candidate, d) {
                            valid = Some(candidate);
                        } else {
                            entry.unsafe_match.get_or_insert(candidate);
                        }
                    }
                }
                entry.next_candidate += 1;
                if valid.is_some() {
                    break;
                }
            }
            let entry = &self.buffer[i];
            let outcome = match (valid, entry.unsafe_match) {
                (Some(at), _) => Some((Status::Valid, at)),
                _ if entry.next_candidate <= hi => None,
                (None, Some(at)) => Some((Status::DroppedUnsafe, at)),
                (None, None) => Some((Status::Invalid, entry.interval)),
            };
            match outcome {
                Some((status, at)) => {
                    let entry = self.buffer.remove(i).unwrap();
                    verdicts.push(self.verdict(&entry, status, at));
                }
                None => i += 1,
            }
        }
        self.prune_mac_keys();
        verdicts
    }

    fn prune_mac_keys(&mut self) {
        let oldest_needed = self
            .buffer
            .iter()
            .map(|e| e.next_candidate)
            .min()
            .unwrap_or(self.newest_key.index + 1);
        self.mac_keys = self.mac_keys.split_off(&oldest_needed);
    }

    // Unpaired entries whose interval has closed.
    fn expire_unpaired(&mut self) -> Vec<Verdict> {
        let now = self.clock.interval;
        let last = self.buffer.len();
        let mut verdicts = Vec::new();
        let mut idx = 0;
        self.buffer.retain(|e| {
            let is_open = self.open && idx + 1 == last;
            idx += 1;
            if !e.is_paired() && !is_open && e.interval < now {
                verdicts.push(Verdict {
                    icao: self.icao,
                    seq: e.seq,
                    message: e.message,
                    status: Status::ExpiredUnpaired,
                    interval: e.interval,
                });
                false
            } else {
                true
            }
        });
        verdicts
    }

    fn evict_for_space(&mut self) -> Option<Verdict> {
        if self.buffer.len() < self.config.max_buffer {
            return None;
        }
        let pos = self.buffer.iter().position(|e| !e.is_paired()).unwrap_or(0);
        let entry = self.buffer.remove(pos)?;
        if pos + 1 > self.buffer.len() {
            self.open = false;
        }
        self.counters.evicted += 1;
        Some(self.verdict(&entry, Status::ExpiredUnpaired, entry.interval))
    }

    /// Processes one protocol payload from this sender.
    pub fn on_payload(&mut self, payload: AuthPayload) -> Vec<Verdict> {
        self.l += 1;
        let interval_len = self.config.schedule.interval_len;
        let mut verdicts = Vec::new();
        match payload {
            AuthPayload::Data(message) => {
                self.last_orphan = None;
                if self.open {
                    let back = self.buffer.back().expect("open entry exists");
                    if back.message == message && !back.is_paired() {
                        return verdicts;
                    }
                }
                self.open = false;
                self.clock.tick(interval_len);
                verdicts.extend(self.evict_for_space());
                let entry = BufferedEntry {
                    seq: self.next_seq,
                    message,
                    interval: self.clock.interval,
                    tags: Vec::new(),
                    arrival_order: self.l,
                    next_candidate: 0,
                    unsafe_match: None,
                };
                self.next_seq += 1;
                let (lo, _) = self.candidates(&entry);
                self.buffer.push_back(BufferedEntry {
                    next_candidate: lo,
                    ..entry
                });
                self.open = true;
            }
            AuthPayload::Mac(tag) => {
                let arrival_interval = self.clock.interval;
                if self.open {
                    let entry = self.buffer.back_mut().expect("open entry exists");
                    if !entry.tags.iter().any(|t| t.tag == tag) {
                        if entry.tags.len() < MAX_TAGS_PER_ENTRY {
                            entry.tags.push(ReceivedTag {
                                tag,
                                arrival_interval,
                            });
                        } else {
                            self.counters.excess_macs += 1;
                        }
                    }
                } else if self.last_orphan != Some(tag) {
                    // Its Data frames were lost; the message still used a slot.
                    self.last_orphan = Some(tag);
                    self.counters.orphan_macs += 1;
                    self.clock.tick(interval_len);
                }
            }
            AuthPayload::Key(candidate) => {
                self.open = false;
                self.last_orphan = None;
                match self.classify_key(candidate) {
                    Ok(KeyOutcome::Advanced(index)) | Ok(KeyOutcome::Current(index)) => {
                        self.clock = IntervalClock {
                            interval: index + self.d(),
                            slots: 0,
                        };
                        verdicts.extend(self.authenticate_buffered());
                    }
                    Ok(KeyOutcome::Stale(_)) | Err(_) => {}
                }
            }
        }
        verdicts.extend(self.expire_unpaired());
        verdicts
    }

    /// Ends the stream. Paired entries still waiting on lookahead keys are
    /// judged with the keys at hand: an unsafe match drops them, and a
    /// known key for their estimated interval with no match makes them
    /// invalid. Everything else expires.
    pub fn flush(&mut self) -> Vec<Verdict> {
        self.open = false;
        let mut verdicts = self.authenticate_buffered();
        let newest = self.newest_key.index;
        let entries: Vec<_> = self.buffer.drain(..).collect();
        verdicts.extend(entries.iter().map(|e| {
            let (status, at) = match e.unsafe_match {
                Some(at) => (Status::DroppedUnsafe, at),
                None if e.is_paired() && newest >= e.interval => (Status::Invalid, e.interval),
                None => (Status::ExpiredUnpaired, e.interval),
            };
            self.verdict(e, status, at)
        }));
        self.mac_keys.clear();
        verdicts
    }

    /// Checks the structural invariants; used by tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.newest_key.index < self.anchor.index {
            return Err("newest key older than anchor".into());
        }
        if self.buffer.len() > self.config.max_buffer {
            return Err(format!("buffer holds {} entries", self.buffer.len()));
        }
        for e in &self.buffer {
            let (_, hi) = self.candidates(e);
            if e.is_paired() && hi <= self.newest_key.index && e.next_candidate > hi {
                return Err(format!("entry {} fully checked but still buffered", e.seq));
            }
        }
        Ok(())
    }
}

/// Frame and verdict counts across all senders.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub valid: u64,
    pub invalid: u64,
    pub dropped_unsafe: u64,
    pub expired: u64,
    /// Protocol frames from senders without a provisioned anchor.
    pub unverifiable: u64,
    /// Frames failing parity after correction.
    pub corrupt: u64,
    /// Well-formed frames that are not protocol payloads.
    pub non_protocol: u64,
    pub invalid_keys: u64,
}

impl Summary {
    pub fn record(&mut self, verdicts: &[Verdict]) {
        for v in verdicts {
            match v.status {
                Status::Valid => self.valid += 1,
                Status::Invalid => self.invalid += 1,
                Status::DroppedUnsafe => self.dropped_unsafe += 1,
                Status::ExpiredUnpaired => self.expired += 1,
            }
        }
    }
}

/// Receiver for any number of senders, each isolated by ICAO address.
#[derive(Debug, Clone)]
pub struct Receiver {
    config: ReceiverConfig,
    senders: HashMap<u32, ReceiverState>,
    summary: Summary,
}

impl Receiver {
    pub fn new(config: ReceiverConfig) -> Result<Self, ReceiverError> {
        config.validate()?;
        Ok(Receiver {
            config,
            senders: HashMap::new(),
            summary: Summary::default(),
        })
    }

    pub fn config(&self) -> &ReceiverConfig {
        &self.config
    }

    /// Installs the trusted anchor for `icao`, replacing any previous state.
    pub fn provision(&mut self, icao: u32, anchor: ChainKey) -> Result<(), ReceiverError> {
        let state = ReceiverState::new(icao, anchor, self.config)?;
        self.senders.insert(icao, state);
        Ok(())
    }

    pub fn state(&self, icao: u32) -> Option<&ReceiverState> {
        self.senders.get(&icao)
    }

    pub fn summary(&self) -> Summary {
        let mut s = self.summary;
        s.invalid_keys = self
            .senders
            .values()
            .map(|st| st.counters.invalid_keys)
            .sum();
        s
    }

    /// Decodes and processes a raw frame; frames failing parity are dropped.
    pub fn on_raw(&mut self, raw: &RawFrame) -> Vec<Verdict> {
        match decode_frame(raw, self.config.max_correctable) {
            Ok(decoded) => self.on_frame(&decoded.frame),
            Err(_) => {
                self.summary.corrupt += 1;
                Vec::new()
            }
        }
    }

    pub fn on_frame(&mut self, frame: &Frame) -> Vec<Verdict> {
        if frame.df != self.config.df {
            self.summary.non_protocol += 1;
            return Vec::new();
        }
        let Ok(payload) = frame.payload() else {
            self.summary.non_protocol += 1;
            return Vec::new();
        };
        let Some(state) = self.senders.get_mut(&frame.icao) else {
            self.summary.unverifiable += 1;
            return Vec::new();
        };
        let verdicts = state.on_payload(payload);
        self.summary.record(&verdicts);
        verdicts
    }

    /// Flushes every sender; remaining entries expire.
    pub fn finish(&mut self) -> Vec<Verdict> {
        let mut icaos: Vec<_> = self.senders.keys().copied().collect();
        icaos.sort_unstable();
        let mut out = Vec::new();
        for icao in icaos {
            out.extend(self.senders.get_mut(&icao).unwrap().flush());
        }
        self.summary.record(&out);
        out
    }
}
