//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Reference values are computed here from first
//! principles rather than through the library.

use std::collections::HashMap;
use std::io::Write;
use std::process::{Command, Stdio};
use std::time::Instant;

use adsb_tesla::crypto::{self, KeyChain, Seed};
use adsb_tesla::frame::{crc24, decode_frame, AuthPayload, Frame, RawFrame};
use adsb_tesla::receiver::{ReceiverState, Status};
use adsb_tesla::sim::{
    default_scenarios, monte_carlo_collision, p_collision, run_traced, AttackKind, ClassKind,
    CollisionParams, EndToEndConfig, EndToEndReport, McMode, TrafficClass,
};
use adsb_tesla::{Bits50, Message, Receiver, ReceiverConfig, Schedule, Sender, SenderConfig};
use hmac::{KeyInit, Mac};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

// P(Poisson(l) >= 2) summed term by term from k = 2.
fn poisson_tail_oracle(l: f64) -> f64 {
    let mut term = (-l).exp() * l * l / 2.0;
    let mut sum = 0.0;
    for k in 2..200 {
        sum += term;
        term *= l / (k + 1) as f64;
    }
    sum
}

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    for (i, target) in [0.01, 0.1, 1.0].into_iter().enumerate() {
        // 1000 stations, 100 us windows, rate chosen to hit the target
        let class = TrafficClass {
            name: ClassKind::ModeS,
            packet_bits: 100,
            rate_per_aircraft: target * 10.0,
            preamble_us: 0.0,
            rate_multiplier: None,
        };
        let params = CollisionParams {
            n: 1000,
            classes: vec![class],
            rate_multiplier: 1.0,
            include_preamble: false,
        };
        let lambda = params.lambda(&class);
        check(
            (lambda - target).abs() < 1e-12,
            format!("lambda {lambda} != {target}"),
        )?;
        let analytic = p_collision(&params).map_err(|e| e.to_string())?;
        let oracle = poisson_tail_oracle(target);
        check(
            (analytic - oracle).abs() <= 1e-12 * oracle.max(1e-300) + 1e-15,
            format!("lambda {target}: analytic {analytic} vs series {oracle}"),
        )?;
        if target == 1.0 {
            check(
                (analytic - (1.0 - 2.0 / std::f64::consts::E)).abs() < 1e-12
                    && (analytic - 0.26424).abs() < 5e-6,
                format!("lambda 1 gives {analytic}"),
            )?;
        }
        let t = Instant::now();
        let mc = monte_carlo_collision(&params, 1_000_000, 100 + i as u64, McMode::Poisson)
            .map_err(|e| e.to_string())?;
        let secs = t.elapsed().as_secs_f64();
        check(
            mc.agrees_within(3.0),
            format!(
                "lambda {target}: mc {} vs {analytic} (ci95 {})",
                mc.empirical_p, mc.ci95_halfwidth
            ),
        )?;
        check(secs < 60.0, format!("lambda {target}: {secs:.1}s"))?;
        notes.push(format!(
            "l={target}: {analytic:.6}/{:.6} {:.2}ci {secs:.1}s",
            mc.empirical_p,
            mc.deviation_in_ci()
        ));
    }
    Ok(notes.join("; "))
}

fn criterion_2() -> Outcome {
    let scenarios = default_scenarios();
    let mode_s = &scenarios[0];
    let combined = &scenarios[1];
    check(
        mode_s.classes[0].packet_bits == 112
            && combined.classes.iter().any(|c| c.packet_bits == 120)
            && combined.classes.iter().all(|c| c.rate_per_aircraft == 6.2),
        "built-in scenario parameters",
    )?;
    let mut notes = Vec::new();
    for (i, n) in [50u64, 200, 500].into_iter().enumerate() {
        let params = combined.params(n);
        let analytic = p_collision(&params).map_err(|e| e.to_string())?;
        // total arrivals in the union of windows: Poisson(lA + lS)
        let total: f64 = params.classes.iter().map(|c| params.lambda(c)).sum();
        let oracle = 1.0 - (-total).exp() * (1.0 + total);
        check(
            (analytic - oracle).abs() < 1e-12,
            format!("n={n}: {analytic} vs {oracle}"),
        )?;
        let mc = monte_carlo_collision(&params, 1_000_000, 200 + i as u64, McMode::Poisson)
            .map_err(|e| e.to_string())?;
        check(
            mc.agrees_within(3.0),
            format!(
                "n={n}: mc {} vs {analytic} (ci95 {})",
                mc.empirical_p, mc.ci95_halfwidth
            ),
        )?;
        notes.push(format!("n={n}: {analytic:.5}/{:.5}", mc.empirical_p));
    }
    let mut prev = (0.0, 0.0);
    for n in 1..=500 {
        let s = p_collision(&mode_s.params(n)).map_err(|e| e.to_string())?;
        let c = p_collision(&combined.params(n)).map_err(|e| e.to_string())?;
        check(s <= c, format!("n={n}: mode-s {s} > combined {c}"))?;
        check(
            s > prev.0 && c > prev.1,
            format!("not strictly increasing at n={n}"),
        )?;
        prev = (s, c);
    }
    notes.push("mode-s <= combined, both increasing over n=1..500".into());
    Ok(notes.join("; "))
}

// MSB-first packing of a `width`-bit value into 7 bytes.
fn pack7(value: u64, width: u32) -> [u8; 7] {
    let mut out = [0u8; 7];
    for bit in 0..width {
        if value >> (width - 1 - bit) & 1 == 1 {
            out[bit as usize / 8] |= 0x80 >> (bit % 8);
        }
    }
    out
}

fn leftmost50(digest: &[u8]) -> u64 {
    let mut v = 0u64;
    for bit in 0..50 {
        v = v << 1 | u64::from(digest[bit / 8] >> (7 - bit % 8) & 1);
    }
    v
}

fn f_oracle(key: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(pack7(key, 50));
    h.update([0x00]);
    leftmost50(&h.finalize())
}

fn criterion_3() -> Outcome {
    let chain = KeyChain::generate(Seed([0x5a; 32]), 64).map_err(|e| e.to_string())?;
    let keys: Vec<u64> = chain.keys().iter().map(|k| k.value()).collect();
    check(keys.len() == 65, format!("chain holds {} keys", keys.len()))?;
    let top = leftmost50(&Sha256::digest([0x5a; 32]));
    check(keys[64] == top, "K_n is not the truncated seed hash")?;
    let mut pairs = 0;
    for i in 1..keys.len() {
        let mut walk = keys[i];
        for j in (0..i).rev() {
            walk = f_oracle(walk);
            check(walk == keys[j], format!("F^{}(K_{i}) != K_{j}", i - j))?;
            pairs += 1;
        }
    }
    let mut state = ReceiverState::new(1, chain.anchor(), ReceiverConfig::default())
        .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut rejected = 0;
    for _ in 0..100_000 {
        let candidate = Bits50::truncate(rng.random());
        if state.accept_key(candidate).is_err() {
            rejected += 1;
        }
    }
    check(
        rejected == 100_000,
        format!("{rejected}/100000 random keys rejected"),
    )?;
    let genuine = chain.key(64).unwrap().bits;
    check(
        state.accept_key(genuine) == Ok(64),
        "genuine K_64 not accepted",
    )?;
    Ok(format!(
        "{pairs} chain pairs checked; 100000/100000 random keys rejected"
    ))
}

fn reference_hmac(key: &[u8], msg: &[u8]) -> [u8; 32] {
    let mut mac = <hmac::Hmac<Sha256> as KeyInit>::new_from_slice(key).unwrap();
    mac.update(msg);
    mac.finalize().into_bytes().into()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pairs = 0;
    // RFC 4231 test case 2
    let rfc = crypto::hmac_sha256(b"Jefe", b"what do ya want for nothing?");
    check(
        hex::encode(rfc) == "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843",
        "RFC 4231 case 2",
    )?;
    for len in [0usize, 1, 7, 55, 64, 65, 200] {
        let key: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        let msg: Vec<u8> = (0..rng.random_range(0..100))
            .map(|_| rng.random())
            .collect();
        check(
            crypto::hmac_sha256(&key, &msg) == reference_hmac(&key, &msg),
            format!("key length {len}"),
        )?;
        pairs += 1;
    }
    for _ in 0..20 {
        let k = Bits50::truncate(rng.random());
        let m = Message::truncate(rng.random());
        let mac_key = crypto::g(k);
        let raw_key = pack7(mac_key.bits().value(), 50);
        let msg = pack7(m.value(), 51);
        let full = reference_hmac(&raw_key, &msg);
        check(
            crypto::hmac_full(&mac_key, &m.to_bytes()) == full,
            "protocol tag mismatch",
        )?;
        let tag = crypto::hmac50(&mac_key, &m.to_bytes()).value();
        check(
            tag == leftmost50(&full),
            "tag is not the leftmost 50 digest bits",
        )?;
        check(
            tag == u64::from_be_bytes(full[..8].try_into().unwrap()) >> 14,
            "truncation",
        )?;
        pairs += 1;
    }
    Ok(format!(
        "{pairs} key/message pairs match the reference; RFC 4231 case 2 ok"
    ))
}

fn run(cfg: &EndToEndConfig) -> Result<EndToEndReport, String> {
    run_traced(cfg).map_err(|e| e.to_string())
}

fn criterion_5() -> Outcome {
    let mut cfg = EndToEndConfig::new(20, 12_500, 0.0, 5);
    cfg.adversary.forge_mac_rate = 1.0;
    cfg.adversary.modify_data_rate = 0.1;
    cfg.adversary.replay_rate = 1.0;
    let report = run(&cfg)?;
    let s = report.stats;
    check(
        s.adversarial_frames >= 1_000_000,
        format!("only {} adversarial frames", s.adversarial_frames),
    )?;
    check(
        s.forged_accepted == 0,
        format!("{} forgeries accepted", s.forged_accepted),
    )?;
    let replays = report
        .attack_frames
        .get(&AttackKind::Replay)
        .copied()
        .unwrap_or(0)
        / 4;
    let replay_verdicts = report
        .attacks
        .get(&AttackKind::Replay)
        .copied()
        .unwrap_or_default();
    check(replays > 0, "no replays injected")?;
    check(
        replay_verdicts.dropped_unsafe == replays && replay_verdicts.total() == replays,
        format!("{replays} replays, verdicts {replay_verdicts:?}"),
    )?;
    for kind in [AttackKind::ForgeMac, AttackKind::ModifyData] {
        let v = report.attacks.get(&kind).copied().unwrap_or_default();
        check(v.valid == 0 && v.total() > 0, format!("{kind:?}: {v:?}"))?;
    }
    Ok(format!(
        "{} adversarial frames, 0 accepted, {replays}/{replays} replays dropped unsafe",
        s.adversarial_frames
    ))
}

// Messages that survived with at least one Data and one Mac copy and whose
// key (or a later one) reached the receiver.
fn bookkeeper(report: &EndToEndReport) -> Result<(usize, usize), String> {
    let mut newest_key: HashMap<u32, u64> = HashMap::new();
    for k in report.keys.iter().filter(|k| k.delivered > 0) {
        let e = newest_key.entry(k.icao).or_default();
        *e = (*e).max(k.index);
    }
    let mut status: HashMap<(u32, u64), Status> = HashMap::new();
    for v in &report.verdicts {
        status.insert((v.icao, v.message.value()), v.status);
    }
    let mut eligible = 0;
    let mut valid = 0;
    for m in &report.messages {
        let keyed = newest_key.get(&m.icao).is_some_and(|&k| k >= m.interval);
        if m.data_delivered > 0 && m.mac_delivered > 0 && keyed {
            eligible += 1;
            match status.get(&(m.icao, m.message.value())) {
                Some(Status::Valid) => valid += 1,
                other => return Err(format!("eligible message {:?} judged {other:?}", m)),
            }
        }
    }
    Ok((eligible, valid))
}

fn key_blackout() -> Result<(), String> {
    let schedule = Schedule::default();
    let chain = KeyChain::generate(Seed([9; 32]), 30).map_err(|e| e.to_string())?;
    let mut sc = SenderConfig::new(0x3C6586, chain.clone());
    sc.schedule = schedule;
    let mut sender = Sender::new(sc).map_err(|e| e.to_string())?;
    let mut rx = Receiver::new(ReceiverConfig::default()).map_err(|e| e.to_string())?;
    rx.provision(0x3C6586, chain.anchor())
        .map_err(|e| e.to_string())?;
    let mut verdicts = Vec::new();
    let mut disclosures = 0;
    let mut deliver = |frames: Vec<Frame>, rx: &mut Receiver, verdicts: &mut Vec<_>| {
        let mut last_key = None;
        for f in frames {
            if let Ok(AuthPayload::Key(k)) = f.payload() {
                if last_key != Some(k) {
                    disclosures += 1;
                    last_key = Some(k);
                }
                // eight consecutive disclosures never arrive
                if (3..=10).contains(&disclosures) {
                    continue;
                }
            }
            verdicts.extend(rx.on_frame(&f));
        }
    };
    for m in 0..300u64 {
        let frames = sender
            .emit_message(Message::truncate(m * 7919))
            .map_err(|e| e.to_string())?;
        deliver(frames, &mut rx, &mut verdicts);
    }
    deliver(sender.finish(), &mut rx, &mut verdicts);
    verdicts.extend(rx.finish());
    let valid = verdicts
        .iter()
        .filter(|v| v.status == Status::Valid)
        .count();
    check(
        valid == 300 && verdicts.len() == 300,
        format!("blackout: {valid} valid of {} verdicts", verdicts.len()),
    )
}

fn criterion_6() -> Outcome {
    let mut eligible = 0;
    let mut messages = 0;
    for seed in 0..2 {
        let cfg = EndToEndConfig::new(10, 1000, 0.3, 60 + seed);
        let report = run(&cfg)?;
        check(
            report.stats.forged_accepted == 0,
            "false accept without adversary",
        )?;
        let (e, v) = bookkeeper(&report)?;
        check(e == v, "bookkeeper mismatch")?;
        eligible += e;
        messages += report.messages.len();
    }
    check(messages >= 10_000, format!("{messages} messages"))?;
    let mut cfg = EndToEndConfig::new(10, 1000, 0.3, 66);
    cfg.adversary.forge_mac_rate = 0.5;
    cfg.adversary.modify_data_rate = 0.1;
    cfg.adversary.replay_rate = 1.0;
    let hostile = run(&cfg)?;
    check(
        hostile.stats.forged_accepted == 0,
        format!("{} false accepts under loss", hostile.stats.forged_accepted),
    )?;
    key_blackout()?;
    Ok(format!(
        "{eligible}/{eligible} eligible of {messages} messages valid; 0 false accepts; 8-interval key blackout recovered"
    ))
}

// Mode-S parity by polynomial long division of payload * x^24.
fn crc_oracle(payload: &[u8; 11]) -> u32 {
    const POLY: u128 = 0x1FF_F409;
    let mut r: u128 = 0;
    for b in payload {
        r = r << 8 | u128::from(*b);
    }
    r <<= 24;
    for shift in (0..88).rev() {
        if r >> (shift + 24) & 1 == 1 {
            r ^= POLY << shift;
        }
    }
    r as u32
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut frames = Vec::new();
    for _ in 0..10_000 {
        let me = rng.random::<u64>() >> 8;
        let f = Frame::new(17, rng.random_range(0..8), rng.random_range(0..1 << 24), me)
            .map_err(|e| e.to_string())?;
        let raw = f.to_raw();
        let back = decode_frame(&raw, 0).map_err(|e| e.to_string())?;
        check(back.frame == f && back.frame.to_raw() == raw, "round trip")?;
        check(
            RawFrame::from_slice(raw.as_bytes()).map_err(|e| e.to_string())? == raw,
            "byte round trip",
        )?;
        frames.push(f);
    }
    for f in frames.iter().take(20) {
        for pos in 0..112 {
            let mut raw = f.to_raw();
            raw.flip_bit(pos);
            let fixed = decode_frame(&raw, 1).map_err(|e| format!("bit {pos}: {e}"))?;
            check(
                fixed.frame == *f && fixed.corrected_bits == 1,
                format!("bit {pos} not corrected"),
            )?;
        }
    }
    for _ in 0..1000 {
        let payload: [u8; 11] = rng.random();
        let got = crc24(&payload).map_err(|e| e.to_string())?;
        check(
            got == crc_oracle(&payload),
            format!("crc of {}", hex::encode(payload)),
        )?;
    }
    Ok("10000 round trips; 112/112 single-bit positions corrected; 1000 CRCs match".into())
}

fn cli(args: &[&str], stdin: &[u8]) -> Result<(i32, Vec<u8>), String> {
    let mut child = Command::new(env!("CARGO_BIN_EXE_adsb-tesla"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin)
        .map_err(|e| e.to_string())?;
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let seed = "00112233445566778899aabbccddeeff00112233445566778899aabbccddeeff";
    let (code, _) = cli(
        &[
            "keygen",
            "--seed",
            seed,
            "--length",
            "40",
            "--icao",
            "4ca123",
            "--out",
            &path("chain.json"),
            "--anchors-out",
            &path("anchors.json"),
        ],
        b"",
    )?;
    check(code == 0, format!("keygen exit {code}"))?;
    let messages = 300u64;
    let mut input = String::new();
    for m in 0..messages {
        let msg = Message::truncate(m.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        input.push_str(&format!(
            "{{\"icao\":\"4ca123\",\"message_hex\":\"{}\"}}\n",
            msg.to_hex()
        ));
    }
    let sign = ["sign", "--chain", &path("chain.json"), "--finish"];
    let (c1, frames1) = cli(&sign, input.as_bytes())?;
    let (c2, frames2) = cli(&sign, input.as_bytes())?;
    check(c1 == 0 && c2 == 0, "sign failed")?;
    check(
        !frames1.is_empty() && frames1 == frames2,
        "sign output differs between runs",
    )?;
    let verify = ["verify", "--anchors", &path("anchors.json")];
    let (v1, out1) = cli(&verify, &frames1)?;
    let (_, out2) = cli(&verify, &frames2)?;
    check(v1 == 0, format!("verify exit {v1}"))?;
    check(out1 == out2, "verify output differs between runs")?;
    let text = String::from_utf8(out1).map_err(|e| e.to_string())?;
    let summary: serde_json::Value =
        serde_json::from_str(text.lines().last().unwrap_or("{}")).map_err(|e| e.to_string())?;
    check(
        summary["valid"] == messages && summary["invalid"] == 0,
        format!("summary {summary}"),
    )?;
    Ok(format!(
        "{} frame bytes identical across runs; valid={messages} invalid=0",
        frames1.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("collision model", criterion_1),
        ("combined collision model", criterion_2),
        ("chain soundness", criterion_3),
        ("HMAC correctness", criterion_4),
        ("forgery resistance", criterion_5),
        ("loss tolerance", criterion_6),
        ("codec", criterion_7),
        ("end-to-end determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.1}s] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
