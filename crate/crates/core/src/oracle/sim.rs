use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{Color, Hypothesis, HypothesisParams, Policy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub hypothesis: Hypothesis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub hypothesis: Hypothesis,
    pub trials: u64,
    pub wrong_declarations: u64,
    pub total_tosses: u64,
    /// Empirical probability of declaring the wrong bias.
    pub delta: f64,
    pub delta_se: f64,
    /// Mean number of tosses.
    pub hitting_time: f64,
    pub hitting_time_se: f64,
}

/// Runs `cfg.trials` independent walks under `cfg.hypothesis`.
///
/// The generator is xoshiro256++ seeded from `cfg.seed` through SplitMix64, so
/// results are identical across platforms for a given seed. Each toss draws a
/// uniform integer below the denominator of the heads probability and
/// compares it to the numerator, which is exact.
pub fn simulate(policy: &Policy, params: &HypothesisParams, cfg: &SimConfig) -> Result<SimOutcome> {
    if cfg.trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let p = params.heads_probability(cfg.hypothesis);
    let (heads, denom) = match (p.numer().to_u64(), p.denom().to_u64()) {
        (Some(n), Some(d)) => (n, d),
        _ => return Err(invalid("heads probability does not fit 64-bit integers")),
    };
    let wrong = match cfg.hypothesis {
        Hypothesis::Plus => Color::Red,
        Hypothesis::Minus => Color::Blue,
    };

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed);
    let mut wrong_count = 0u64;
    let mut tosses = 0u64;
    let mut tosses_sq = 0u128;
    for _ in 0..cfg.trials {
        let (mut h, mut t) = (0usize, 0usize);
        let outcome = loop {
            let color = policy.color_at(h, t);
            if color.is_stop() {
                break color;
            }
            if rng.gen_range(0..denom) < heads {
                h += 1;
            } else {
                t += 1;
            }
        };
        if outcome == wrong {
            wrong_count += 1;
        }
        let n = (h + t) as u64;
        tosses += n;
        tosses_sq += (n as u128) * (n as u128);
    }

    let trials = cfg.trials as f64;
    let delta = wrong_count as f64 / trials;
    let mean = tosses as f64 / trials;
    let var = (tosses_sq as f64 / trials - mean * mean).max(0.0);
    Ok(SimOutcome {
        hypothesis: cfg.hypothesis,
        trials: cfg.trials,
        wrong_declarations: wrong_count,
        total_tosses: tosses,
        delta,
        delta_se: (delta * (1.0 - delta) / trials).sqrt(),
        hitting_time: mean,
        hitting_time_se: (var / trials).sqrt(),
    })
}
