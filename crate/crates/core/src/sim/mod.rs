//! Channel simulation: analytic collision model, Monte Carlo estimates,
//! collision sweeps and end-to-end protocol runs.

mod collision;
mod e2e;
mod montecarlo;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use collision::{
    p_at_least_two, p_collision, p_collision_combined, p_collision_single, ClassKind,
    CollisionParams, TrafficClass, ADSB_BITS, BASE_RATE_PER_S, BIT_US, MODE_S_BITS, PREAMBLE_US,
};
pub use e2e::{
    run_end_to_end, run_traced, AdversaryConfig, AttackKind, AuthStats, EndToEndConfig,
    EndToEndReport, KeyRecord, MessageRecord, StatusCounts, ICAO_BASE,
};
pub use montecarlo::{ci95_halfwidth, monte_carlo_collision, McMode};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("parameter out of domain: {0}")]
    Domain(&'static str),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub analytic_p: f64,
    pub empirical_p: f64,
    pub trials: u64,
    pub ci95_halfwidth: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auth_stats: Option<AuthStats>,
}

impl SimResult {
    /// `|analytic - empirical|` measured in 95% half-widths.
    pub fn deviation_in_ci(&self) -> f64 {
        let diff = (self.analytic_p - self.empirical_p).abs();
        if self.ci95_halfwidth > 0.0 {
            diff / self.ci95_halfwidth
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn agrees_within(&self, k: f64) -> bool {
        // with p-hat at 0 or 1 the normal interval collapses; fall back to
        // one trial's resolution
        let tol = (k * self.ci95_halfwidth).max(1.0 / self.trials as f64);
        (self.analytic_p - self.empirical_p).abs() <= tol
    }
}

fn default_multiplier() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

/// One named curve of the collision sweep; `n` comes from the sweep range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub classes: Vec<TrafficClass>,
    #[serde(default = "default_multiplier")]
    pub rate_multiplier: f64,
    #[serde(default = "default_true")]
    pub include_preamble: bool,
}

impl Scenario {
    pub fn params(&self, n: u64) -> CollisionParams {
        CollisionParams {
            n,
            classes: self.classes.clone(),
            rate_multiplier: self.rate_multiplier,
            include_preamble: self.include_preamble,
        }
    }
}

/// Mode-S alone, then Mode-S with ADS-B at 1x, 2x and 4x the base rate.
pub fn default_scenarios() -> Vec<Scenario> {
    let both = vec![TrafficClass::mode_s(), TrafficClass::adsb()];
    let mut out = vec![Scenario {
        name: "mode_s_only".into(),
        classes: vec![TrafficClass::mode_s()],
        rate_multiplier: 1.0,
        include_preamble: true,
    }];
    for (name, m) in [
        ("combined", 1.0),
        ("combined_x2", 2.0),
        ("combined_x4", 4.0),
    ] {
        out.push(Scenario {
            name: name.into(),
            classes: both.clone(),
            rate_multiplier: m,
            include_preamble: true,
        });
    }
    out
}

fn default_trials() -> u64 {
    100_000
}

/// Scenario file read by `collide`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_range: Vec<u64>,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<Scenario>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: McMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: String,
    pub n: u64,
    pub analytic_p: f64,
    pub empirical_p: f64,
    pub trials: u64,
    pub ci95: f64,
}

/// Mixes the sweep seed with the row position so every row gets its own
/// stream regardless of evaluation order.
fn row_seed(seed: u64, scenario: usize, point: usize) -> u64 {
    let mut z = seed ^ ((scenario as u64) << 32 | point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Analytic and Monte Carlo collision probability for every (scenario, n).
pub fn collision_sweep(
    n_range: &[u64],
    scenarios: &[Scenario],
    trials: u64,
    seed: u64,
    mode: McMode,
) -> Result<Vec<SweepRow>, SimError> {
    let jobs: Vec<(usize, usize)> = (0..scenarios.len())
        .flat_map(|s| (0..n_range.len()).map(move |p| (s, p)))
        .collect();
    jobs.par_iter()
        .map(|&(s, p)| {
            let sc = &scenarios[s];
            let n = n_range[p];
            let r = monte_carlo_collision(&sc.params(n), trials, row_seed(seed, s, p), mode)?;
            Ok(SweepRow {
                scenario: sc.name.clone(),
                n,
                analytic_p: r.analytic_p,
                empirical_p: r.empirical_p,
                trials: r.trials,
                ci95: r.ci95_halfwidth,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
