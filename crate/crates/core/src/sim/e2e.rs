//! End-to-end protocol runs over a lossy broadcast channel with an
//! active adversary.
//!
//! Aircraft take turns emitting their next message (in a random order
//! each round); every frame copy is then subject to independent Bernoulli
//! loss before reaching a single receiver that holds all anchors. The
//! adversary sees every on-air frame and every disclosed key but cannot
//! invert `F` or `G`.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{Bits50, Message};
use crate::crypto::{g, hmac50, KeyChain, Seed};
use crate::frame::{pack_payload, AuthPayload, Frame};
use crate::receiver::{Receiver, ReceiverConfig, Status, Verdict};
use crate::sender::{Schedule, Sender, SenderConfig};

use super::montecarlo::ci95_halfwidth;
use super::{SimError, SimResult};

/// First ICAO address handed out to simulated aircraft.
pub const ICAO_BASE: u32 = 0xA0_0000;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AdversaryConfig {
    /// Per honest message: inject a fabricated message with a random tag.
    pub forge_mac_rate: f64,
    /// Per honest Data copy: flip message bits in flight (parity fixed up).
    pub modify_data_rate: f64,
    /// Per key disclosure: inject a fabricated message tagged with the key
    /// that was just disclosed.
    pub replay_rate: f64,
}

impl AdversaryConfig {
    pub fn passive() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    ForgeMac,
    ModifyData,
    Replay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndToEndConfig {
    pub n_aircraft: u32,
    /// Messages each aircraft sends.
    pub messages_per_aircraft: u64,
    pub per_copy_loss: f64,
    #[serde(default)]
    pub adversary: AdversaryConfig,
    #[serde(default)]
    pub schedule: Schedule,
    pub rng_seed: u64,
}

impl EndToEndConfig {
    pub fn new(
        n_aircraft: u32,
        messages_per_aircraft: u64,
        per_copy_loss: f64,
        rng_seed: u64,
    ) -> Self {
        EndToEndConfig {
            n_aircraft,
            messages_per_aircraft,
            per_copy_loss,
            adversary: AdversaryConfig::default(),
            schedule: Schedule::default(),
            rng_seed,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !(0.0..1.0).contains(&self.per_copy_loss) {
            return Err(SimError::Domain("per_copy_loss must be in [0, 1)"));
        }
        let a = &self.adversary;
        if !rate_ok(a.forge_mac_rate) || !rate_ok(a.modify_data_rate) || !rate_ok(a.replay_rate) {
            return Err(SimError::Domain("adversary rates must be in [0, 1]"));
        }
        if u64::from(self.n_aircraft) > u64::from(0xFF_FFFF - ICAO_BASE) {
            return Err(SimError::Domain("too many aircraft"));
        }
        self.schedule
            .validate()
            .map_err(|_| SimError::Domain("schedule parameters must be at least 1"))
    }
}

/// Verdict tallies for one class of traffic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub valid: u64,
    pub invalid: u64,
    pub dropped_unsafe: u64,
    pub expired: u64,
}

impl StatusCounts {
    fn add(&mut self, status: Status) {
        match status {
            Status::Valid => self.valid += 1,
            Status::Invalid => self.invalid += 1,
            Status::DroppedUnsafe => self.dropped_unsafe += 1,
            Status::ExpiredUnpaired => self.expired += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.valid + self.invalid + self.dropped_unsafe + self.expired
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthStats {
    pub messages: u64,
    pub valid: u64,
    pub invalid: u64,
    pub dropped_unsafe: u64,
    pub expired: u64,
    /// Valid verdicts for messages the genuine sender never sent.
    pub forged_accepted: u64,
    pub adversarial_frames: u64,
    pub honest_frames: u64,
    pub delivered_frames: u64,
}

impl AuthStats {
    /// Honest frames on air per message (protocol overhead).
    pub fn frames_per_message(&self) -> f64 {
        self.honest_frames as f64 / self.messages.max(1) as f64
    }
}

/// Ground truth for one honest message, as seen by the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageRecord {
    pub icao: u32,
    pub message: Message,
    pub interval: u64,
    pub data_delivered: u32,
    pub mac_delivered: u32,
}

/// Ground truth for one honest key disclosure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyRecord {
    pub icao: u32,
    pub index: u64,
    pub delivered: u32,
}

#[derive(Debug, Clone, Default)]
pub struct EndToEndReport {
    pub stats: AuthStats,
    pub verdicts: Vec<Verdict>,
    pub messages: Vec<MessageRecord>,
    pub keys: Vec<KeyRecord>,
    /// Verdicts on adversarial messages, per attack.
    pub attacks: HashMap<AttackKind, StatusCounts>,
    /// Adversarial frames put on air, per attack.
    pub attack_frames: HashMap<AttackKind, u64>,
}

enum Origin {
    Message(usize),
    Key(usize),
    Attack,
}

struct Aircraft {
    icao: u32,
    sender: Sender,
}

struct Channel<'a> {
    rng: ChaCha8Rng,
    loss: f64,
    receiver: Receiver,
    report: &'a mut EndToEndReport,
}

impl Channel<'_> {
    fn transmit(&mut self, frame: &Frame, origin: Origin) {
        let delivered = !self.rng.random_bool(self.loss);
        match origin {
            Origin::Attack => self.report.stats.adversarial_frames += 1,
            _ => self.report.stats.honest_frames += 1,
        }
        if !delivered {
            return;
        }
        match origin {
            Origin::Message(i) => {
                let rec = &mut self.report.messages[i];
                match frame.payload() {
                    Ok(AuthPayload::Data(_)) => rec.data_delivered += 1,
                    Ok(AuthPayload::Mac(_)) => rec.mac_delivered += 1,
                    _ => {}
                }
            }
            Origin::Key(i) => self.report.keys[i].delivered += 1,
            Origin::Attack => {}
        }
        self.report.stats.delivered_frames += 1;
        let verdicts = self.receiver.on_raw(&frame.to_raw());
        self.report.verdicts.extend(verdicts);
    }
}

fn payload_frame(template: &Frame, payload: AuthPayload) -> Frame {
    Frame::new(
        template.df,
        template.capability,
        template.icao,
        pack_payload(&payload),
    )
    .expect("template fields are in range")
}

/// Runs the protocol and returns every verdict together with the channel's
/// ground truth.
pub fn run_traced(cfg: &EndToEndConfig) -> Result<EndToEndReport, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let chain_len = cfg.schedule.chain_length_for(cfg.messages_per_aircraft);

    let rx_config = ReceiverConfig {
        schedule: cfg.schedule,
        ..ReceiverConfig::default()
    };
    let mut receiver = Receiver::new(rx_config).map_err(|e| SimError::Config(e.to_string()))?;
    let mut fleet = Vec::with_capacity(cfg.n_aircraft as usize);
    for a in 0..cfg.n_aircraft {
        let icao = ICAO_BASE + a;
        let chain = KeyChain::generate(Seed(rng.random()), chain_len)
            .map_err(|e| SimError::Config(e.to_string()))?;
        receiver
            .provision(icao, chain.anchor())
            .map_err(|e| SimError::Config(e.to_string()))?;
        let mut sc = SenderConfig::new(icao, chain);
        sc.schedule = cfg.schedule;
        let sender = Sender::new(sc).map_err(|e| SimError::Config(e.to_string()))?;
        fleet.push(Aircraft { icao, sender });
    }

    let mut report = EndToEndReport::default();
    let mut genuine: HashMap<u32, std::collections::HashSet<Message>> = HashMap::new();
    let mut adversarial: HashMap<(u32, Message), AttackKind> = HashMap::new();
    let adv = cfg.adversary;
    let dups = cfg.schedule.duplicates as usize;

    let mut channel = Channel {
        rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ 0x5eed_c4a2_2e1f_0001),
        loss: cfg.per_copy_loss,
        receiver,
        report: &mut report,
    };

    let mut order: Vec<usize> = (0..fleet.len()).collect();
    for round in 0..=cfg.messages_per_aircraft {
        order.shuffle(&mut rng);
        for &a in &order {
            let ac = &mut fleet[a];
            let last_round = round == cfg.messages_per_aircraft;
            let (frames, msg_index) = if last_round {
                (ac.sender.finish(), None)
            } else {
                let message = Message::truncate(rng.random());
                let interval = ac.sender.state().current_interval;
                let frames = ac
                    .sender
                    .emit_message(message)
                    .map_err(|e| SimError::Config(e.to_string()))?;
                genuine.entry(ac.icao).or_default().insert(message);
                channel.report.messages.push(MessageRecord {
                    icao: ac.icao,
                    message,
                    interval,
                    data_delivered: 0,
                    mac_delivered: 0,
                });
                (frames, Some(channel.report.messages.len() - 1))
            };

            let mut i = 0;
            while i < frames.len() {
                let frame = frames[i];
                match frame.payload() {
                    Ok(AuthPayload::Data(m)) => {
                        let idx = msg_index.expect("data frames only come with messages");
                        if rng.random_bool(adv.modify_data_rate) {
                            let flip = loop {
                                let mask: u64 = rng.random::<u64>() & ((1 << Message::WIDTH) - 1);
                                if mask != 0 {
                                    break mask;
                                }
                            };
                            let tampered = Message::truncate(m.value() ^ flip);
                            adversarial.insert((ac.icao, tampered), AttackKind::ModifyData);
                            *channel
                                .report
                                .attack_frames
                                .entry(AttackKind::ModifyData)
                                .or_default() += 1;
                            channel.transmit(
                                &payload_frame(&frame, AuthPayload::Data(tampered)),
                                Origin::Attack,
                            );
                        } else {
                            channel.transmit(&frame, Origin::Message(idx));
                        }
                        i += 1;
                    }
                    Ok(AuthPayload::Mac(_)) => {
                        channel.transmit(
                            &frame,
                            Origin::Message(msg_index.expect("mac frames only come with messages")),
                        );
                        i += 1;
                        let batch_done = i == frames.len()
                            || !matches!(frames[i].payload(), Ok(AuthPayload::Mac(_)));
                        if batch_done && rng.random_bool(adv.forge_mac_rate) {
                            let fake = Message::truncate(rng.random());
                            let tag = Bits50::truncate(rng.random());
                            adversarial.insert((ac.icao, fake), AttackKind::ForgeMac);
                            *channel
                                .report
                                .attack_frames
                                .entry(AttackKind::ForgeMac)
                                .or_default() += 2 * dups as u64;
                            for p in [AuthPayload::Data(fake), AuthPayload::Mac(tag)] {
                                for _ in 0..dups {
                                    channel.transmit(&payload_frame(&frame, p), Origin::Attack);
                                }
                            }
                        }
                    }
                    Ok(AuthPayload::Key(k)) => {
                        let index = ac
                            .sender
                            .config()
                            .chain
                            .keys()
                            .iter()
                            .position(|&c| c == k)
                            .expect("own key") as u64;
                        channel.report.keys.push(KeyRecord {
                            icao: ac.icao,
                            index,
                            delivered: 0,
                        });
                        let rec = channel.report.keys.len() - 1;
                        let mut j = i;
                        while j < frames.len() && frames[j] == frame {
                            channel.transmit(&frame, Origin::Key(rec));
                            j += 1;
                        }
                        i = j;
                        // the anchor is public from the start; replays need a fresh key
                        if index > 0 && rng.random_bool(adv.replay_rate) {
                            let fake = Message::truncate(rng.random());
                            let tag = hmac50(&g(k), &fake.to_bytes());
                            adversarial.insert((ac.icao, fake), AttackKind::Replay);
                            *channel
                                .report
                                .attack_frames
                                .entry(AttackKind::Replay)
                                .or_default() += 2 * dups as u64;
                            for p in [AuthPayload::Data(fake), AuthPayload::Mac(tag)] {
                                for _ in 0..dups {
                                    channel.transmit(&payload_frame(&frame, p), Origin::Attack);
                                }
                            }
                        }
                    }
                    Err(_) => unreachable!("sender emits protocol payloads only"),
                }
            }
        }
    }

    let tail = channel.receiver.finish();
    channel.report.verdicts.extend(tail);
    drop(channel);

    let mut stats = report.stats;
    stats.messages = report.messages.len() as u64;
    for v in &report.verdicts {
        let is_genuine = genuine.get(&v.icao).is_some_and(|s| s.contains(&v.message));
        match v.status {
            Status::Valid => stats.valid += 1,
            Status::Invalid => stats.invalid += 1,
            Status::DroppedUnsafe => stats.dropped_unsafe += 1,
            Status::ExpiredUnpaired => stats.expired += 1,
        }
        if let Some(kind) = adversarial.get(&(v.icao, v.message)) {
            report.attacks.entry(*kind).or_default().add(v.status);
        }
        if v.status == Status::Valid && !is_genuine {
            stats.forged_accepted += 1;
        }
    }
    report.stats = stats;
    Ok(report)
}

/// Runs the protocol and summarizes it. `analytic_p` is the probability
/// that a message keeps at least one Data and one Mac copy; `empirical_p`
/// is the fraction of genuine messages judged valid.
pub fn run_end_to_end(cfg: &EndToEndConfig) -> Result<SimResult, SimError> {
    let report = run_traced(cfg)?;
    let stats = report.stats;
    let genuine_valid = stats.valid - stats.forged_accepted;
    let survive = 1.0 - cfg.per_copy_loss.powi(cfg.schedule.duplicates as i32);
    let trials = stats.messages.max(1);
    let empirical_p = genuine_valid as f64 / trials as f64;
    Ok(SimResult {
        analytic_p: survive * survive,
        empirical_p,
        trials,
        ci95_halfwidth: ci95_halfwidth(empirical_p, trials),
        auth_stats: Some(stats),
    })
}
