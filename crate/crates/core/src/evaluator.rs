//! Exact profiles by a forward sweep over anti-diagonals.
//!
//! Every path to `(h, t)` has probability `p^h (1-p)^t`, so the reach
//! probability of a cell is its number of all-White paths from the origin times
//! that weight. [`profile_exact`] counts paths with big integers and applies the
//! weights once per diagonal over a common denominator. Cells on the first
//! closure diagonal that sit inside a linear-tail channel are closed with the
//! walk formulas of [`crate::walk`].

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{invalid, Result};
use crate::exact::Rational;
use crate::model::{Closure, Color, Hypothesis, HypothesisParams, Policy, Profile};
use crate::walk::BoundaryPair;

#[inline]
fn tri(h: usize, t: usize) -> usize {
    let d = h + t;
    d * (d + 1) / 2 + h
}

/// Reach probabilities for one hypothesis over every cell with `h + t <= N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachTable {
    hypothesis: Hypothesis,
    horizon: usize,
    probs: Vec<Rational>,
}

impl ReachTable {
    pub fn hypothesis(&self) -> Hypothesis {
        self.hypothesis
    }

    /// Largest diagonal covered (the policy horizon).
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Probability that the walk arrives at `(h, t)` having crossed only White
    /// cells; zero outside the table.
    pub fn get(&self, h: usize, t: usize) -> Rational {
        if h + t > self.horizon {
            Rational::zero()
        } else {
            self.probs[tri(h, t)].clone()
        }
    }

    pub fn diagonal_mass(&self, d: usize) -> Rational {
        if d > self.horizon {
            return Rational::zero();
        }
        (0..=d).fold(Rational::zero(), |acc, h| acc + &self.probs[tri(h, d - h)])
    }
}

/// Forward reach recursion in exact rationals, one hypothesis at a time.
pub fn reach_probabilities(policy: &Policy, params: &HypothesisParams, hypothesis: Hypothesis) -> ReachTable {
    let p = params.heads_probability(hypothesis);
    let q = Rational::one() - &p;
    let n = policy.horizon();
    let mut probs = vec![Rational::zero(); (n + 1) * (n + 2) / 2];
    probs[0] = Rational::one();
    for d in 1..=n {
        for h in 0..=d {
            let t = d - h;
            let mut acc = Rational::zero();
            if h > 0 && policy.color_at(h - 1, t) == Color::White {
                acc += &probs[tri(h - 1, t)] * &p;
            }
            if t > 0 && policy.color_at(h, t - 1) == Color::White {
                acc += &probs[tri(h, t - 1)] * &q;
            }
            probs[tri(h, t)] = acc;
        }
    }
    ReachTable {
        hypothesis,
        horizon: n,
        probs,
    }
}

/// Number of all-White paths from the origin to each cell with `h + t <= N`.
pub(crate) struct PathCounts {
    counts: Vec<BigUint>,
}

impl PathCounts {
    pub(crate) fn new(policy: &Policy) -> Self {
        let n = policy.horizon();
        let mut counts = vec![BigUint::zero(); (n + 1) * (n + 2) / 2];
        counts[0] = BigUint::one();
        for d in 1..=n {
            for h in 0..=d {
                let t = d - h;
                let from_left = h > 0 && policy.color_at(h - 1, t) == Color::White;
                let from_above = t > 0 && policy.color_at(h, t - 1) == Color::White;
                let value = match (from_left, from_above) {
                    (true, true) => &counts[tri(h - 1, t)] + &counts[tri(h, t - 1)],
                    (true, false) => counts[tri(h - 1, t)].clone(),
                    (false, true) => counts[tri(h, t - 1)].clone(),
                    (false, false) => continue,
                };
                counts[tri(h, t)] = value;
            }
        }
        Self { counts }
    }

    pub(crate) fn get(&self, h: usize, t: usize) -> &BigUint {
        &self.counts[tri(h, t)]
    }
}

/// Integer form of the hypothesis weights: with `eps = a/b`, heads has
/// probability `u / w` under plus and `v / w` under minus, where `u = b + 2a`,
/// `v = b - 2a`, `w = 2b`.
struct Weights {
    u_pow: Vec<BigUint>,
    v_pow: Vec<BigUint>,
    w_pow: Vec<BigUint>,
}

impl Weights {
    fn new(params: &HypothesisParams, max_exp: usize) -> Self {
        let eps = params.epsilon();
        let a = eps.numer().to_biguint().expect("epsilon is positive");
        let b = eps.denom().to_biguint().expect("denominator is positive");
        let two_a = &a + &a;
        let u = &b + &two_a;
        let v = &b - &two_a;
        let w = &b + &b;
        let powers = |base: &BigUint| {
            let mut out = Vec::with_capacity(max_exp + 1);
            out.push(BigUint::one());
            for i in 0..max_exp {
                let next = &out[i] * base;
                out.push(next);
            }
            out
        };
        Self {
            u_pow: powers(&u),
            v_pow: powers(&v),
            w_pow: powers(&w),
        }
    }

    /// `w^(h+t)` times the probability of one particular path to `(h, t)`.
    fn path_numerator(&self, hypothesis: Hypothesis, h: usize, t: usize) -> BigUint {
        match hypothesis {
            Hypothesis::Plus => &self.u_pow[h] * &self.v_pow[t],
            Hypothesis::Minus => &self.v_pow[h] * &self.u_pow[t],
        }
    }

    fn ratio(&self, numer: BigUint, diag: usize) -> Rational {
        Rational::new(BigInt::from(numer), BigInt::from(self.w_pow[diag].clone()))
    }
}

/// Per-diagonal accumulator for one quantity under one hypothesis.
#[derive(Default)]
struct Accum {
    total: BigUint,
}

impl Accum {
    /// Adds a diagonal's numerator, lifted to the common denominator `w^top`.
    fn add_diagonal(&mut self, sum: BigUint, d: usize, top: usize, weights: &Weights) {
        if !sum.is_zero() {
            self.total += sum * &weights.w_pow[top - d];
        }
    }
}

/// Profile `(delta+, delta-, H+, H-)` of `policy`, exactly.
pub fn profile_exact(policy: &Policy, params: &HypothesisParams) -> Profile {
    let n = policy.horizon();
    let counts = PathCounts::new(policy);
    let weights = Weights::new(params, n);

    let mut wrong_plus = Accum::default();
    let mut wrong_minus = Accum::default();
    let mut time_plus = Accum::default();
    let mut time_minus = Accum::default();
    // Frontier mass inside a linear-tail channel, keyed by h - t.
    let mut channel: BTreeMap<i64, (BigUint, BigUint)> = BTreeMap::new();

    for d in 0..=n {
        let mut red_plus = BigUint::zero();
        let mut blue_minus = BigUint::zero();
        let mut white_plus = BigUint::zero();
        let mut white_minus = BigUint::zero();
        for h in 0..=d {
            let t = d - h;
            let count = counts.get(h, t);
            if count.is_zero() {
                continue;
            }
            match policy.color_at(h, t) {
                Color::Red => red_plus += count * weights.path_numerator(Hypothesis::Plus, h, t),
                Color::Blue => blue_minus += count * weights.path_numerator(Hypothesis::Minus, h, t),
                Color::White if d < n => {
                    white_plus += count * weights.path_numerator(Hypothesis::Plus, h, t);
                    white_minus += count * weights.path_numerator(Hypothesis::Minus, h, t);
                }
                Color::White => {
                    let entry = channel.entry(h as i64 - t as i64).or_default();
                    entry.0 += count * weights.path_numerator(Hypothesis::Plus, h, t);
                    entry.1 += count * weights.path_numerator(Hypothesis::Minus, h, t);
                }
            }
        }
        wrong_plus.add_diagonal(red_plus, d, n, &weights);
        wrong_minus.add_diagonal(blue_minus, d, n, &weights);
        time_plus.add_diagonal(white_plus, d, n, &weights);
        time_minus.add_diagonal(white_minus, d, n, &weights);
    }

    let mut delta_plus = weights.ratio(wrong_plus.total, n);
    let mut delta_minus = weights.ratio(wrong_minus.total, n);
    let mut h_plus = weights.ratio(time_plus.total, n);
    let mut h_minus = weights.ratio(time_minus.total, n);

    if !channel.is_empty() {
        let Closure::LinearTail { c } = policy.closure() else {
            unreachable!("forced-stop closures have no White frontier cells");
        };
        let p_plus = params.heads_probability(Hypothesis::Plus);
        let p_minus = params.heads_probability(Hypothesis::Minus);
        for (offset, (mass_plus, mass_minus)) in channel {
            let a = (c as i64 + offset) as u32;
            let b = (c as i64 - offset) as u32;
            let walk_plus = BoundaryPair::new(a, b, p_plus.clone()).expect("channel offsets are interior");
            let walk_minus = BoundaryPair::new(a, b, p_minus.clone()).expect("channel offsets are interior");
            let reach_plus = weights.ratio(mass_plus, n);
            let reach_minus = weights.ratio(mass_minus, n);
            delta_plus += &reach_plus * walk_plus.lower_hit_probability();
            h_plus += &reach_plus * walk_plus.expected_hitting_time();
            delta_minus += &reach_minus * walk_minus.upper_hit_probability();
            h_minus += &reach_minus * walk_minus.expected_hitting_time();
        }
    }

    Profile::new(delta_plus, delta_minus, h_plus, h_minus).expect("evaluated profiles are well-formed")
}

/// Mass on diagonal `n` reached through White cells only, under `hypothesis`.
pub fn tail_mass(policy: &Policy, params: &HypothesisParams, n: usize, hypothesis: Hypothesis) -> Result<Rational> {
    if n > policy.horizon() {
        return Err(invalid(format!(
            "diagonal {n} lies beyond the explicit horizon {}",
            policy.horizon()
        )));
    }
    Ok(diagonal_masses(policy, params, hypothesis).swap_remove(n))
}

/// White-path mass on every diagonal `0..=N` under `hypothesis`.
pub fn diagonal_masses(policy: &Policy, params: &HypothesisParams, hypothesis: Hypothesis) -> Vec<Rational> {
    let n = policy.horizon();
    let counts = PathCounts::new(policy);
    let weights = Weights::new(params, n);
    (0..=n)
        .map(|d| {
            let numer = (0..=d)
                .filter(|&h| !counts.get(h, d - h).is_zero())
                .fold(BigUint::zero(), |acc, h| {
                    acc + counts.get(h, d - h) * weights.path_numerator(hypothesis, h, d - h)
                });
            weights.ratio(numer, d)
        })
        .collect()
}

/// `max` over both hypotheses of [`tail_mass`].
pub fn tail_mass_max(policy: &Policy, params: &HypothesisParams, n: usize) -> Result<Rational> {
    let plus = tail_mass(policy, params, n, Hypothesis::Plus)?;
    let minus = tail_mass(policy, params, n, Hypothesis::Minus)?;
    Ok(if plus >= minus { plus } else { minus })
}

/// Probability of reaching `(h, t)` under `hypothesis`; exact, any cell.
pub fn reach_probability(policy: &Policy, params: &HypothesisParams, h: usize, t: usize, hypothesis: Hypothesis) -> Rational {
    let expanded = policy.materialize(h + t);
    let counts = PathCounts::new(&expanded);
    let weights = Weights::new(params, h + t);
    let numer = counts.get(h, t) * weights.path_numerator(hypothesis, h, t);
    weights.ratio(numer, h + t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{frac, int};

    fn params() -> HypothesisParams {
        HypothesisParams::new(frac(1, 10)).unwrap()
    }

    #[test]
    fn one_toss_reach() {
        let p1 = Policy::linear(1).unwrap().materialize(1);
        let reach = reach_probabilities(&p1, &params(), Hypothesis::Plus);
        assert_eq!(reach.get(0, 0), int(1));
        assert_eq!(reach.get(1, 0), frac(3, 5));
        assert_eq!(reach.get(0, 1), frac(2, 5));
    }

    #[test]
    fn two_path_cell() {
        let policy = Policy::from_fn(2, Closure::ForcedStop, |_, _| Color::White).unwrap();
        let reach = reach_probabilities(&policy, &params(), Hypothesis::Plus);
        // HT and TH.
        assert_eq!(reach.get(1, 1), frac(12, 25));
        assert_eq!(reach.diagonal_mass(2), int(1));
    }

    #[test]
    fn linear_one_profile() {
        let profile = profile_exact(&Policy::linear(1).unwrap(), &params());
        assert_eq!(profile, Profile::new(frac(2, 5), frac(2, 5), int(1), int(1)).unwrap());
    }

    #[test]
    fn declare_immediately_profile() {
        let profile = profile_exact(&Policy::declare_immediately(), &params());
        assert_eq!(profile, Profile::new(int(0), int(1), int(0), int(0)).unwrap());
    }

    #[test]
    fn linear_two_profile() {
        let expected = Profile::new(frac(4, 13), frac(4, 13), frac(50, 13), frac(50, 13)).unwrap();
        assert_eq!(profile_exact(&Policy::linear(2).unwrap(), &params()), expected);
        // Representation does not matter.
        assert_eq!(profile_exact(&Policy::linear(2).unwrap().materialize(9), &params()), expected);
    }

    #[test]
    fn tail_mass_examples() {
        let all_white = Policy::from_fn(3, Closure::ForcedStop, |_, _| Color::White).unwrap();
        assert_eq!(tail_mass(&all_white, &params(), 0, Hypothesis::Plus).unwrap(), int(1));
        assert_eq!(tail_mass(&all_white, &params(), 1, Hypothesis::Plus).unwrap(), int(1));
        let p1 = Policy::linear(1).unwrap().materialize(3);
        assert_eq!(tail_mass(&p1, &params(), 2, Hypothesis::Plus).unwrap(), int(0));
        assert!(tail_mass(&p1, &params(), 4, Hypothesis::Plus).is_err());
        // Diagonals below the horizon, not just the last one.
        let p1 = Policy::linear(1).unwrap().materialize(6);
        assert_eq!(tail_mass(&p1, &params(), 1, Hypothesis::Minus).unwrap(), int(1));
        assert_eq!(tail_mass(&p1, &params(), 2, Hypothesis::Minus).unwrap(), int(0));
    }

    #[test]
    fn reach_tables_agree_with_path_counts() {
        let policy = Policy::from_fn(6, Closure::LinearTail { c: 2 }, |h, t| match (h + t) % 3 {
            0 => Color::White,
            _ if h + t == 5 => crate::model::Closure::LinearTail { c: 2 }.color(h, t),
            1 => Color::White,
            _ => Color::majority(h, t),
        })
        .unwrap();
        for hyp in Hypothesis::BOTH {
            let table = reach_probabilities(&policy, &params(), hyp);
            let masses = diagonal_masses(&policy, &params(), hyp);
            for (d, mass) in masses.iter().enumerate() {
                assert_eq!(&table.diagonal_mass(d), mass);
            }
            for d in 0..=6 {
                for h in 0..=d {
                    assert_eq!(table.get(h, d - h), reach_probability(&policy, &params(), h, d - h, hyp));
                }
            }
        }
    }
}
