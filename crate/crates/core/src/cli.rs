//! Command-line front end. Every command reads files or stdin and writes
//! stdout; nothing is interactive.
//!
//! Exit codes: 0 success, 1 usage, 2 integrity or verification failure,
//! 3 I/O.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{Bits50, Message};
use crate::crypto::{ChainKey, KeyChain, Seed};
use crate::frame::{
    decode_frame, pack_payload, AuthPayload, CaptureLine, Frame, DF_EXTENDED_SQUITTER,
};
use crate::receiver::{Receiver, ReceiverConfig, Status, Summary, Verdict};
use crate::sender::{Schedule, Sender, SenderConfig, SenderError};
use crate::sim::{
    collision_sweep, run_end_to_end, write_sweep_csv, AdversaryConfig, EndToEndConfig, McMode,
    SweepConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    Usage = 1,
    Integrity = 2,
    Io = 3,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

/// An error paired with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub source: anyhow::Error,
}

impl CliError {
    fn usage(e: impl Into<anyhow::Error>) -> Self {
        CliError {
            exit: Exit::Usage,
            source: e.into(),
        }
    }
    fn io(e: impl Into<anyhow::Error>) -> Self {
        CliError {
            exit: Exit::Io,
            source: e.into(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::io(e)
    }
}

type CliResult<T = Exit> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "adsb-tesla",
    version,
    about = "Delayed-key-disclosure authentication for ADS-B"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a key chain file.
    Keygen(KeygenArgs),
    /// Turn JSON-lines messages into an authenticated frame capture.
    #[command(visible_alias = "send")]
    Sign(SignArgs),
    /// Verify a frame capture and print one verdict per message.
    Verify(VerifyArgs),
    /// Collision probability sweep as CSV.
    Collide(CollideArgs),
    /// End-to-end protocol run over a lossy channel.
    Simulate(SimulateArgs),
    /// Encode or decode single frames.
    #[command(subcommand)]
    Frame(FrameCommand),
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    /// Key disclosure delay, in intervals.
    #[arg(long, default_value_t = 10)]
    pub d: u64,
    /// Messages per key interval.
    #[arg(long = "interval", default_value_t = 10)]
    pub interval_len: u64,
    /// Copies of every protocol frame.
    #[arg(long, default_value_t = 2)]
    pub duplicates: u32,
}

impl ScheduleArgs {
    fn schedule(&self) -> CliResult<Schedule> {
        let s = Schedule {
            d: self.d,
            interval_len: self.interval_len,
            duplicates: self.duplicates,
        };
        s.validate().map_err(CliError::usage)?;
        Ok(s)
    }
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    /// 64 hex characters; drawn from system entropy when absent.
    #[arg(long)]
    pub seed: Option<String>,
    /// Index of the last key (the chain holds length + 1 keys).
    #[arg(long)]
    pub length: u64,
    /// Sender address the chain belongs to, 6 hex characters.
    #[arg(long)]
    pub icao: Option<String>,
    /// Chain file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an anchors file for `verify` (needs --icao).
    #[arg(long)]
    pub anchors_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SignArgs {
    #[arg(long)]
    pub chain: PathBuf,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// After the last message, emit the remaining key disclosures.
    #[arg(long)]
    pub finish: bool,
    /// Messages file; stdin when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub anchors: PathBuf,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, default_value_t = 1)]
    pub max_correctable: u32,
    #[arg(long, default_value_t = 64)]
    pub max_chain_depth: u64,
    #[arg(long, default_value_t = 256)]
    pub max_buffer: usize,
    /// Extra intervals a tag must beat its key's disclosure by.
    #[arg(long, default_value_t = 1)]
    pub guard_intervals: u64,
    /// Downlink format of protocol frames.
    #[arg(long, default_value_t = DF_EXTENDED_SQUITTER)]
    pub df: u8,
    /// Also fail on malformed lines and frames from unknown senders.
    #[arg(long)]
    pub strict: bool,
    /// Capture file; stdin when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Poisson,
    Timeline,
}

impl From<ModeArg> for McMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Poisson => McMode::Poisson,
            ModeArg::Timeline => McMode::Timeline,
        }
    }
}

#[derive(Debug, Args)]
pub struct CollideArgs {
    /// Scenario JSON; the built-in scenarios over n = 0..=500 step 50 when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON run description; flags below are ignored when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub aircraft: u32,
    /// Messages per aircraft.
    #[arg(long, default_value_t = 1000)]
    pub messages: u64,
    /// Independent loss probability per frame copy.
    #[arg(long, default_value_t = 0.0)]
    pub loss: f64,
    #[arg(long, default_value_t = 0.0)]
    pub forge_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub modify_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub replay_rate: f64,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum FrameCommand {
    /// Build a frame from its fields and print it in capture format.
    Encode(EncodeArgs),
    /// Parse a capture-format frame and print its fields as JSON.
    Decode(DecodeArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long, default_value_t = DF_EXTENDED_SQUITTER)]
    pub df: u8,
    #[arg(long, default_value_t = 5)]
    pub capability: u8,
    #[arg(long)]
    pub icao: String,
    /// Raw 56-bit ME field, 14 hex characters.
    #[arg(long, group = "body")]
    pub me: Option<String>,
    /// Data payload: 13 hex characters.
    #[arg(long, group = "body")]
    pub data: Option<String>,
    /// Mac payload: 13 hex characters.
    #[arg(long, group = "body")]
    pub mac: Option<String>,
    /// Key payload: 13 hex characters.
    #[arg(long, group = "body")]
    pub key: Option<String>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// 28 hex characters, optionally followed by `;timestamp`.
    pub frame: String,
    #[arg(long, default_value_t = 1)]
    pub max_correctable: u32,
}

/// Chain file written by `keygen`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainFile {
    pub seed: String,
    pub length: u64,
    pub anchor: String,
    pub anchor_index: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icao: Option<String>,
}

impl ChainFile {
    pub fn chain(&self) -> anyhow::Result<KeyChain> {
        let seed: Seed = self.seed.parse().context("chain seed")?;
        let chain = KeyChain::generate(seed, self.length)?;
        let anchor: Bits50 = self.anchor.parse().context("chain anchor")?;
        if chain.key(self.anchor_index).map(|k| k.bits) != Some(anchor) {
            return Err(anyhow!(
                "anchor does not match the chain generated from the seed"
            ));
        }
        Ok(chain)
    }
}

/// One entry of an anchors file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorEntry {
    pub icao: String,
    pub anchor_hex: String,
    pub anchor_index: u64,
}

#[derive(Debug, Deserialize)]
struct MessageLine {
    icao: String,
    message_hex: String,
}

#[derive(Debug, Serialize)]
struct VerdictLine {
    icao: String,
    seq: u64,
    status: Status,
    interval: u64,
    message_hex: String,
}

impl From<&Verdict> for VerdictLine {
    fn from(v: &Verdict) -> Self {
        VerdictLine {
            icao: format_icao(v.icao),
            seq: v.seq,
            status: v.status,
            interval: v.interval,
            message_hex: v.message.to_hex(),
        }
    }
}

#[derive(Debug, Serialize)]
struct SummaryLine {
    summary: bool,
    #[serde(flatten)]
    counts: Summary,
    malformed: u64,
}

pub fn parse_icao(s: &str) -> anyhow::Result<u32> {
    let s = s.trim_start_matches("0x");
    if s.is_empty() || s.len() > 6 {
        return Err(anyhow!("ICAO address must be 1 to 6 hex characters: {s:?}"));
    }
    u32::from_str_radix(s, 16).map_err(|_| anyhow!("invalid ICAO address {s:?}"))
}

pub fn format_icao(icao: u32) -> String {
    format!("{icao:06x}")
}

fn open_input(path: Option<&Path>) -> CliResult<Box<dyn BufRead>> {
    Ok(match path {
        Some(p) => Box::new(io::BufReader::new(
            File::open(p)
                .with_context(|| format!("opening {}", p.display()))
                .map_err(CliError::io)?,
        )),
        None => Box::new(io::stdin().lock()),
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::io)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(CliError::usage)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::io)
}

pub fn keygen(args: &KeygenArgs, out: &mut dyn Write) -> CliResult {
    if args.length == 0 {
        return Err(CliError::usage(anyhow!("--length must be at least 1")));
    }
    let seed = match &args.seed {
        Some(s) => s
            .parse::<Seed>()
            .context("--seed")
            .map_err(CliError::usage)?,
        None => Seed(rand::rng().random()),
    };
    let icao = args
        .icao
        .as_deref()
        .map(parse_icao)
        .transpose()
        .map_err(CliError::usage)?;
    let chain = KeyChain::generate(seed, args.length).map_err(CliError::usage)?;
    let file = ChainFile {
        seed: seed.to_hex(),
        length: args.length,
        anchor: chain.anchor().bits.to_hex(),
        anchor_index: 0,
        icao: icao.map(format_icao),
    };
    let text = serde_json::to_string_pretty(&file).map_err(CliError::io)? + "\n";
    match &args.out {
        Some(p) => write_text(p, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    if let Some(p) = &args.anchors_out {
        let Some(icao) = icao else {
            return Err(CliError::usage(anyhow!("--anchors-out needs --icao")));
        };
        let entries = vec![AnchorEntry {
            icao: format_icao(icao),
            anchor_hex: file.anchor.clone(),
            anchor_index: 0,
        }];
        write_text(
            p,
            &(serde_json::to_string_pretty(&entries).map_err(CliError::io)? + "\n"),
        )?;
    }
    Ok(Exit::Ok)
}

pub fn sign(args: &SignArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let schedule = args.schedule.schedule()?;
    let file: ChainFile = read_json(&args.chain)?;
    let chain = file.chain().map_err(CliError::usage)?;
    let bound = file
        .icao
        .as_deref()
        .map(parse_icao)
        .transpose()
        .map_err(CliError::usage)?;
    let input = open_input(args.input.as_deref())?;
    let mut out = BufWriter::new(out);
    // BTreeMap keeps `--finish` output in a stable order
    let mut senders: BTreeMap<u32, Sender> = BTreeMap::new();
    let mut malformed = 0u64;

    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<MessageLine>(&line)
            .map_err(anyhow::Error::from)
            .and_then(|m| Ok((parse_icao(&m.icao)?, m.message_hex.parse::<Message>()?)));
        let (icao, message) = match parsed {
            Ok(v) => v,
            Err(e) => {
                malformed += 1;
                writeln!(err, "line {}: skipped: {e:#}", lineno + 1)?;
                continue;
            }
        };
        if bound.is_some_and(|b| b != icao) {
            malformed += 1;
            writeln!(
                err,
                "line {}: skipped: chain belongs to another ICAO",
                lineno + 1
            )?;
            continue;
        }
        let sender = match senders.entry(icao) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(v) => {
                let mut cfg = SenderConfig::new(icao, chain.clone());
                cfg.schedule = schedule;
                v.insert(Sender::new(cfg).map_err(CliError::usage)?)
            }
        };
        match sender.emit_message(message) {
            Ok(frames) => write_frames(&mut out, &frames)?,
            Err(e @ SenderError::ChainExhausted { .. }) => {
                out.flush()?;
                return Err(CliError::usage(
                    anyhow!(e).context(format!("line {}", lineno + 1)),
                ));
            }
            Err(e) => return Err(CliError::usage(e)),
        }
    }
    if args.finish {
        for sender in senders.values_mut() {
            write_frames(&mut out, &sender.finish())?;
        }
    }
    out.flush()?;
    if malformed > 0 {
        writeln!(err, "{malformed} malformed line(s) skipped")?;
    }
    Ok(Exit::Ok)
}

fn write_frames(out: &mut impl Write, frames: &[Frame]) -> io::Result<()> {
    for f in frames {
        writeln!(out, "{}", f.to_raw())?;
    }
    Ok(())
}

pub fn load_anchors(path: &Path) -> CliResult<Vec<(u32, ChainKey)>> {
    let entries: Vec<AnchorEntry> = read_json(path)?;
    entries
        .iter()
        .map(|e| {
            let icao = parse_icao(&e.icao)?;
            let bits: Bits50 = e.anchor_hex.parse().context("anchor_hex")?;
            Ok((
                icao,
                ChainKey {
                    bits,
                    index: e.anchor_index,
                },
            ))
        })
        .collect::<anyhow::Result<_>>()
        .map_err(CliError::usage)
}

pub fn verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let config = ReceiverConfig {
        schedule: args.schedule.schedule()?,
        max_chain_depth: args.max_chain_depth,
        max_buffer: args.max_buffer,
        guard_intervals: args.guard_intervals,
        max_correctable: args.max_correctable,
        df: args.df,
        ..ReceiverConfig::default()
    };
    if args.max_correctable > crate::frame::MAX_CORRECTABLE_LIMIT {
        return Err(CliError::usage(anyhow!(
            "--max-correctable must be at most 5"
        )));
    }
    let mut receiver = Receiver::new(config).map_err(CliError::usage)?;
    for (icao, anchor) in load_anchors(&args.anchors)? {
        receiver.provision(icao, anchor).map_err(CliError::usage)?;
    }
    let input = open_input(args.input.as_deref())?;
    let mut out = BufWriter::new(out);
    let mut malformed = 0u64;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<CaptureLine>() {
            Ok(c) => emit_verdicts(&mut out, &receiver.on_raw(&c.raw))?,
            Err(e) => {
                malformed += 1;
                writeln!(err, "line {}: skipped: {e}", lineno + 1)?;
            }
        }
    }
    emit_verdicts(&mut out, &receiver.finish())?;
    let summary = receiver.summary();
    let line = SummaryLine {
        summary: true,
        counts: summary,
        malformed,
    };
    serde_json::to_writer(&mut out, &line).map_err(CliError::io)?;
    writeln!(out)?;
    out.flush()?;

    let failed = summary.invalid > 0
        || summary.dropped_unsafe > 0
        || (args.strict && (malformed > 0 || summary.unverifiable > 0 || summary.invalid_keys > 0));
    Ok(if failed { Exit::Integrity } else { Exit::Ok })
}

fn emit_verdicts(out: &mut impl Write, verdicts: &[Verdict]) -> CliResult<()> {
    for v in verdicts {
        serde_json::to_writer(&mut *out, &VerdictLine::from(v)).map_err(CliError::io)?;
        writeln!(out)?;
    }
    Ok(())
}

pub fn collide(args: &CollideArgs, out: &mut dyn Write) -> CliResult {
    let mut cfg: SweepConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => SweepConfig {
            n_range: (0..=500).step_by(50).collect(),
            scenarios: crate::sim::default_scenarios(),
            trials: 100_000,
            seed: 0,
            mode: McMode::Poisson,
        },
    };
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(m) = args.mode {
        cfg.mode = m.into();
    }
    let rows = collision_sweep(&cfg.n_range, &cfg.scenarios, cfg.trials, cfg.seed, cfg.mode)
        .map_err(CliError::usage)?;
    write_sweep_csv(&rows, out).map_err(CliError::io)?;
    Ok(Exit::Ok)
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult {
    let cfg: EndToEndConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => EndToEndConfig {
            n_aircraft: args.aircraft,
            messages_per_aircraft: args.messages,
            per_copy_loss: args.loss,
            adversary: AdversaryConfig {
                forge_mac_rate: args.forge_rate,
                modify_data_rate: args.modify_rate,
                replay_rate: args.replay_rate,
            },
            schedule: args.schedule.schedule()?,
            rng_seed: args.seed,
        },
    };
    let result = run_end_to_end(&cfg).map_err(CliError::usage)?;
    serde_json::to_writer_pretty(&mut *out, &result).map_err(CliError::io)?;
    writeln!(out)?;
    let forged = result.auth_stats.map_or(0, |s| s.forged_accepted);
    Ok(if forged > 0 {
        Exit::Integrity
    } else {
        Exit::Ok
    })
}

#[derive(Debug, Serialize)]
struct DecodedJson {
    df: u8,
    capability: u8,
    icao: String,
    me: String,
    parity: String,
    type_code: u8,
    corrected_bits: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    payload: Option<PayloadJson>,
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", content = "body_hex", rename_all = "snake_case")]
enum PayloadJson {
    Data(String),
    Mac(String),
    Key(String),
}

pub fn frame(cmd: &FrameCommand, out: &mut dyn Write) -> CliResult {
    match cmd {
        FrameCommand::Encode(a) => {
            let icao = parse_icao(&a.icao).map_err(CliError::usage)?;
            let me = encode_me(a).map_err(CliError::usage)?;
            let f = Frame::new(a.df, a.capability, icao, me).map_err(CliError::usage)?;
            writeln!(out, "{}", f.to_raw())?;
            Ok(Exit::Ok)
        }
        FrameCommand::Decode(a) => {
            let line: CaptureLine = a.frame.trim().parse().map_err(CliError::usage)?;
            if a.max_correctable > crate::frame::MAX_CORRECTABLE_LIMIT {
                return Err(CliError::usage(anyhow!(
                    "--max-correctable must be at most 5"
                )));
            }
            let decoded = match decode_frame(&line.raw, a.max_correctable) {
                Ok(d) => d,
                Err(e) => {
                    return Err(CliError {
                        exit: Exit::Integrity,
                        source: e.into(),
                    });
                }
            };
            let f = decoded.frame;
            let payload = f.payload().ok().map(|p| match p {
                AuthPayload::Data(m) => PayloadJson::Data(m.to_hex()),
                AuthPayload::Mac(t) => PayloadJson::Mac(t.to_hex()),
                AuthPayload::Key(k) => PayloadJson::Key(k.to_hex()),
            });
            let json = DecodedJson {
                df: f.df,
                capability: f.capability,
                icao: format_icao(f.icao),
                me: format!("{:014x}", f.me),
                parity: format!("{:06x}", f.parity),
                type_code: f.type_code(),
                corrected_bits: decoded.corrected_bits,
                payload,
            };
            serde_json::to_writer(&mut *out, &json).map_err(CliError::io)?;
            writeln!(out)?;
            Ok(Exit::Ok)
        }
    }
}

fn encode_me(a: &EncodeArgs) -> anyhow::Result<u64> {
    if let Some(me) = &a.me {
        let v = u64::from_str_radix(me, 16).map_err(|_| anyhow!("invalid --me {me:?}"))?;
        if me.len() != 14 {
            return Err(anyhow!("--me must be 14 hex characters"));
        }
        return Ok(v);
    }
    let payload = if let Some(d) = &a.data {
        AuthPayload::Data(d.parse()?)
    } else if let Some(m) = &a.mac {
        AuthPayload::Mac(m.parse()?)
    } else if let Some(k) = &a.key {
        AuthPayload::Key(k.parse()?)
    } else {
        return Ok(0);
    };
    Ok(pack_payload(&payload))
}

/// Runs one parsed command.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match &cli.command {
        Command::Keygen(a) => keygen(a, out),
        Command::Sign(a) => sign(a, out, err),
        Command::Verify(a) => verify(a, out, err),
        Command::Collide(a) => collide(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Frame(c) => frame(c, out),
    }
}

/// Entry point for the binary: parses `std::env::args` and maps every
/// outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Exit::Usage
            } else {
                Exit::Ok
            }
            .into();
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    let result = run(&cli, &mut stdout.lock(), &mut stderr.lock());
    match result {
        Ok(code) => code.into(),
        Err(e)
            if e.source
                .downcast_ref::<io::Error>()
                .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe) =>
        {
            Exit::Ok.into()
        }
        Err(e) => {
            eprintln!("error: {:#}", e.source);
            e.exit.into()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icao_parsing() {
        assert_eq!(parse_icao("abc123").unwrap(), 0xABC123);
        assert_eq!(parse_icao("0x40621d").unwrap(), 0x40621D);
        assert!(parse_icao("1234567").is_err());
        assert!(parse_icao("zz").is_err());
        assert_eq!(format_icao(0x1), "000001");
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn keygen_length_zero_is_usage_error() {
        let args = KeygenArgs {
            seed: None,
            length: 0,
            icao: None,
            out: None,
            anchors_out: None,
        };
        let e = keygen(&args, &mut Vec::new()).unwrap_err();
        assert_eq!(e.exit, Exit::Usage);
    }

    #[test]
    fn chain_file_rejects_wrong_anchor() {
        let file = ChainFile {
            seed: "00".repeat(32),
            length: 4,
            anchor: Bits50::ZERO.to_hex(),
            anchor_index: 0,
            icao: None,
        };
        assert!(file.chain().is_err());
    }
}
