//! Monte Carlo estimates of the collision probability.
//!
//! Trials are grouped into fixed-size batches; batch `b` draws from the
//! ChaCha stream `b` of the run seed, so results do not depend on how
//! rayon schedules the batches.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::collision::{p_collision, CollisionParams};
use super::{SimError, SimResult};

const BATCH: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McMode {
    /// Independent Poisson counts per class and window.
    #[default]
    Poisson,
    /// Every aircraft transmits periodically with a uniform random phase;
    /// starts falling inside each class window are counted exactly.
    Timeline,
}

enum Sampler {
    Poisson(Vec<Option<Poisson<f64>>>),
    Timeline(Vec<(f64, f64)>),
}

impl Sampler {
    fn new(params: &CollisionParams, mode: McMode) -> Result<Self, SimError> {
        Ok(match mode {
            McMode::Poisson => Sampler::Poisson(
                params
                    .classes
                    .iter()
                    .map(|c| {
                        let l = params.lambda(c);
                        if l > 0.0 {
                            Poisson::new(l)
                                .map(Some)
                                .map_err(|_| SimError::Domain("invalid Poisson mean"))
                        } else {
                            Ok(None)
                        }
                    })
                    .collect::<Result<_, _>>()?,
            ),
            McMode::Timeline => Sampler::Timeline(
                params
                    .classes
                    .iter()
                    .map(|c| {
                        (
                            c.window_us(params.include_preamble) * 1e-6,
                            c.period_s(params.rate_multiplier),
                        )
                    })
                    .collect(),
            ),
        })
    }

    fn collides(&self, n: u64, rng: &mut ChaCha8Rng) -> bool {
        let mut count = 0u64;
        match self {
            Sampler::Poisson(dists) => {
                for d in dists.iter().flatten() {
                    count += d.sample(rng) as u64;
                    if count >= 2 {
                        return true;
                    }
                }
            }
            Sampler::Timeline(classes) => {
                for &(window, period) in classes {
                    if !period.is_finite() {
                        continue;
                    }
                    for _ in 0..n {
                        let phase: f64 = rng.random::<f64>() * period;
                        // starts at phase + k*period; count those in [0, window)
                        if phase < window {
                            count += ((window - phase) / period).ceil() as u64;
                            if count >= 2 {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }
}

/// 95% normal-approximation half-width for a proportion.
pub fn ci95_halfwidth(p: f64, trials: u64) -> f64 {
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Fraction of trials with two or more overlapping transmissions.
pub fn monte_carlo_collision(
    params: &CollisionParams,
    trials: u64,
    rng_seed: u64,
    mode: McMode,
) -> Result<SimResult, SimError> {
    if trials == 0 {
        return Err(SimError::Domain("trials must be at least 1"));
    }
    let analytic_p = p_collision(params)?;
    let sampler = Sampler::new(params, mode)?;
    let batches = trials.div_ceil(BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(b);
            let size = BATCH.min(trials - b * BATCH);
            (0..size)
                .filter(|_| sampler.collides(params.n, &mut rng))
                .count() as u64
        })
        .sum();
    let empirical_p = hits as f64 / trials as f64;
    Ok(SimResult {
        analytic_p,
        empirical_p,
        trials,
        ci95_halfwidth: ci95_halfwidth(empirical_p, trials),
        auth_stats: None,
    })
}
