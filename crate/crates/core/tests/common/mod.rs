#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use sprt_lattice::exact::frac;
use sprt_lattice::{Closure, Color, HypothesisParams, Policy};

pub fn eps_tenth() -> HypothesisParams {
    HypothesisParams::new(frac(1, 10)).unwrap()
}

/// A seeded random policy with horizon `1..=max_horizon`, a forced-stop or
/// linear-tail closure (threshold 1 to 3) and about 60% of its cells White.
/// The origin is always White.
pub fn random_policy(seed: u64, max_horizon: usize) -> Policy {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let horizon = rng.gen_range(1..=max_horizon);
    let closure = match rng.gen_range(0..4u32) {
        0 => Closure::ForcedStop,
        c => Closure::LinearTail { c },
    };
    Policy::from_fn(horizon, closure, |h, t| {
        let color = match rng.gen_range(0..10) {
            _ if h + t == 0 => Color::White,
            0 | 1 => Color::Blue,
            2 | 3 => Color::Red,
            _ => Color::White,
        };
        // Keep the seam valid: last explicit diagonal stops outside the channel.
        if h + t + 1 == horizon && color == Color::White && closure.color(h, t).is_stop() {
            Color::majority(h, t)
        } else {
            color
        }
    })
    .unwrap()
}
