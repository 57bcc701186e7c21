//! Analytic packet-collision probabilities on a shared channel.
//!
//! Transmissions of each traffic class form a Poisson process. For `n`
//! aircraft sending packets of `t_p` seconds every `T` seconds, the number
//! of transmissions in one packet time is Poisson with mean
//! `lambda = n * t_p / T`, and a collision is two or more of them.

use serde::{Deserialize, Serialize};

use super::SimError;

/// Duration of one bit on the 1090 MHz channel, in microseconds.
pub const BIT_US: f64 = 1.0;
/// Synchronization preamble sent before each ADS-B packet.
pub const PREAMBLE_US: f64 = 8.0;
/// Maximum per-aircraft transmission rate used for channel planning.
pub const BASE_RATE_PER_S: f64 = 6.2;
pub const MODE_S_BITS: u32 = 112;
pub const ADSB_BITS: u32 = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassKind {
    #[serde(rename = "ModeS", alias = "mode_s")]
    ModeS,
    #[serde(rename = "ADSB", alias = "adsb")]
    Adsb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficClass {
    pub name: ClassKind,
    pub packet_bits: u32,
    /// Packets per second per aircraft (`1/T`).
    pub rate_per_aircraft: f64,
    #[serde(default)]
    pub preamble_us: f64,
    /// Overrides the scenario-wide rate multiplier for this class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_multiplier: Option<f64>,
}

impl TrafficClass {
    pub fn mode_s() -> Self {
        TrafficClass {
            name: ClassKind::ModeS,
            packet_bits: MODE_S_BITS,
            rate_per_aircraft: BASE_RATE_PER_S,
            preamble_us: 0.0,
            rate_multiplier: None,
        }
    }

    pub fn adsb() -> Self {
        TrafficClass {
            name: ClassKind::Adsb,
            packet_bits: ADSB_BITS,
            rate_per_aircraft: BASE_RATE_PER_S,
            preamble_us: PREAMBLE_US,
            rate_multiplier: None,
        }
    }

    /// Vulnerability window in microseconds.
    pub fn window_us(&self, include_preamble: bool) -> f64 {
        let bits = f64::from(self.packet_bits) * BIT_US;
        if include_preamble {
            bits + self.preamble_us
        } else {
            bits
        }
    }

    /// Seconds between packets of one aircraft after scaling.
    pub fn period_s(&self, scenario_multiplier: f64) -> f64 {
        let m = self.rate_multiplier.unwrap_or(scenario_multiplier);
        1.0 / (self.rate_per_aircraft * m)
    }
}

fn default_multiplier() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionParams {
    pub n: u64,
    pub classes: Vec<TrafficClass>,
    #[serde(default = "default_multiplier")]
    pub rate_multiplier: f64,
    /// Count the preamble as part of the vulnerability window.
    #[serde(default = "default_true")]
    pub include_preamble: bool,
}

impl CollisionParams {
    pub fn new(n: u64, classes: Vec<TrafficClass>) -> Self {
        CollisionParams {
            n,
            classes,
            rate_multiplier: 1.0,
            include_preamble: true,
        }
    }

    // negated comparisons so that NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.rate_multiplier > 0.0) {
            return Err(SimError::Domain("rate_multiplier must be positive"));
        }
        for c in &self.classes {
            if c.packet_bits == 0 || !(c.rate_per_aircraft >= 0.0) || c.preamble_us < 0.0 {
                return Err(SimError::Domain("traffic class parameters out of range"));
            }
            if let Some(m) = c.rate_multiplier {
                if !(m > 0.0) {
                    return Err(SimError::Domain("rate_multiplier must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Expected transmissions of `class` within one of its packet windows.
    pub fn lambda(&self, class: &TrafficClass) -> f64 {
        lambda(
            self.n,
            class.window_us(self.include_preamble),
            class.period_s(self.rate_multiplier),
        )
    }
}

pub(crate) fn lambda(n: u64, t_p_us: f64, period_s: f64) -> f64 {
    n as f64 * (t_p_us * 1e-6) / period_s
}

/// `P(Poisson(lambda) = 0)` and `P(Poisson(lambda) = 1)`.
fn poisson_head(lambda: f64) -> (f64, f64) {
    let p0 = (-lambda).exp();
    (p0, lambda * p0)
}

/// Collision probability for a single traffic class:
/// `1 - e^-lambda - lambda * e^-lambda` with `lambda = n * t_p / T`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn p_collision_single(n: u64, t_p_us: f64, period_s: f64) -> Result<f64, SimError> {
    if !(t_p_us > 0.0) || !(period_s > 0.0) {
        return Err(SimError::Domain("t_p and T must be positive"));
    }
    Ok(p_at_least_two(lambda(n, t_p_us, period_s)))
}

/// `P(Poisson(lambda) >= 2)` written as one minus the zero and one terms.
pub fn p_at_least_two(lambda: f64) -> f64 {
    let (p0, p1) = poisson_head(lambda);
    1.0 - p0 - p1
}

/// Collision probability with ADS-B and Mode-S sharing the channel:
/// `1 - PA(0)PS(0) - PA(0)PS(1) - PA(1)PS(0)`.
pub fn p_collision_combined(params: &CollisionParams) -> Result<f64, SimError> {
    params.validate()?;
    let [a, b] = params.classes.as_slice() else {
        return Err(SimError::Config(format!(
            "combined model needs exactly two traffic classes, got {}",
            params.classes.len()
        )));
    };
    let (adsb, modes) = match (a.name, b.name) {
        (ClassKind::Adsb, ClassKind::ModeS) => (a, b),
        (ClassKind::ModeS, ClassKind::Adsb) => (b, a),
        _ => {
            return Err(SimError::Config(
                "combined model needs one ADS-B and one Mode-S class".into(),
            ))
        }
    };
    let (pa0, pa1) = poisson_head(params.lambda(adsb));
    let (ps0, ps1) = poisson_head(params.lambda(modes));
    Ok(1.0 - pa0 * ps0 - pa0 * ps1 - pa1 * ps0)
}

/// Single-class model for one class, combined model for two.
pub fn p_collision(params: &CollisionParams) -> Result<f64, SimError> {
    params.validate()?;
    match params.classes.as_slice() {
        [only] => Ok(p_at_least_two(params.lambda(only))),
        [_, _] => p_collision_combined(params),
        other => Err(SimError::Config(format!(
            "expected one or two traffic classes, got {}",
            other.len()
        ))),
    }
}
