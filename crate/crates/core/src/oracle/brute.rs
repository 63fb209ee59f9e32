use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evaluator::profile_exact;
use crate::exact::{serde_fraction, Rational};
use crate::model::{bayes_risk, linear_color, Closure, Color, HypothesisParams, Policy, Profile};

/// `3^12`.
pub const DEFAULT_BUDGET: u128 = 531_441;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub c: u32,
    pub n: usize,
    /// Free cells, in the digit order of a policy index (cell `i` is base-3
    /// digit `i`, least significant first; 0 White, 1 Blue, 2 Red).
    pub interior: Vec<(usize, usize)>,
    pub enumerated: u64,
    #[serde(with = "serde_fraction")]
    pub best_risk: Rational,
    /// Indices of every coloring attaining `best_risk`.
    pub minimizers: Vec<u64>,
    pub linear_index: u64,
    pub linear_profile: Profile,
    #[serde(with = "serde_fraction")]
    pub linear_policy_risk: Rational,
    pub linear_is_minimizer: bool,
    /// Colorings with a smaller error sum than `P_c` but no larger time sum.
    pub dominance_violations: Vec<u64>,
}

impl BruteForceResult {
    /// The policy encoded by `index`.
    pub fn policy(&self, index: u64) -> Policy {
        family_member(self.c, self.n, &self.interior, index).expect("indices come from the enumeration")
    }
}

/// Cells with `h + t <= 2n + 1` and `|h - t| <= c`. Everything else follows
/// `P_c` in the enumerated family.
pub fn interior_cells(c: u32, n: usize) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for d in 0..=2 * n + 1 {
        for h in 0..=d {
            let t = d - h;
            if h.abs_diff(t) <= c as usize {
                cells.push((h, t));
            }
        }
    }
    cells
}

fn digit_color(digit: u64) -> Color {
    match digit {
        0 => Color::White,
        1 => Color::Blue,
        _ => Color::Red,
    }
}

fn family_member(c: u32, n: usize, interior: &[(usize, usize)], mut index: u64) -> Result<Policy> {
    let mut colors = Vec::with_capacity(interior.len());
    for _ in interior {
        colors.push(digit_color(index % 3));
        index /= 3;
    }
    Policy::from_fn(2 * n + 2, Closure::LinearTail { c }, |h, t| {
        match interior.iter().position(|&cell| cell == (h, t)) {
            Some(i) => colors[i],
            None => linear_color(c, h, t),
        }
    })
}

/// Exhaustively evaluates every policy that agrees with `P_c` outside the
/// interior cells for `(c, n)`, and checks that `P_c` minimizes the Bayes risk
/// at `beta`.
pub fn brute_force_truncated_interior(
    c: u32,
    n: usize,
    params: &HypothesisParams,
    beta: &Rational,
    budget: u128,
) -> Result<BruteForceResult> {
    if c == 0 {
        return Err(invalid("threshold c must be at least 1"));
    }
    if *beta <= Rational::zero() {
        return Err(invalid("beta must be positive"));
    }
    let interior = interior_cells(c, n);
    let needed = 3u128.checked_pow(interior.len() as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let total = needed as u64;

    let linear_index: u64 = interior
        .iter()
        .rev()
        .fold(0, |acc, &(h, t)| {
            acc * 3
                + match linear_color(c, h, t) {
                    Color::White => 0,
                    Color::Blue => 1,
                    Color::Red => 2,
                }
        });
    let linear = family_member(c, n, &interior, linear_index)?;
    let linear_profile = profile_exact(&linear, params);
    let linear_risk = bayes_risk(&linear_profile, beta)?;
    let linear_delta = linear_profile.delta_sum();
    let linear_time = linear_profile.time_sum();

    let mut best: Option<Rational> = None;
    let mut minimizers = Vec::new();
    let mut dominance_violations = Vec::new();
    for index in 0..total {
        let policy = family_member(c, n, &interior, index)?;
        let profile = profile_exact(&policy, params);
        let risk = bayes_risk(&profile, beta)?;
        if profile.delta_sum() < linear_delta && profile.time_sum() <= linear_time {
            dominance_violations.push(index);
        }
        match &best {
            Some(b) if risk > *b => {}
            Some(b) if risk == *b => minimizers.push(index),
            _ => {
                best = Some(risk);
                minimizers.clear();
                minimizers.push(index);
            }
        }
    }
    let best_risk = best.expect("the family is never empty");
    Ok(BruteForceResult {
        c,
        n,
        interior,
        enumerated: total,
        linear_is_minimizer: linear_risk == best_risk,
        best_risk,
        minimizers,
        linear_index,
        linear_profile,
        linear_policy_risk: linear_risk,
        dominance_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{frac, int};

    fn params() -> HypothesisParams {
        HypothesisParams::new(frac(1, 10)).unwrap()
    }

    #[test]
    fn interior_sizes() {
        assert_eq!(interior_cells(1, 1).len(), 6);
        assert_eq!(interior_cells(1, 2).len(), 9);
        assert_eq!(interior_cells(2, 1).len(), 8);
    }

    #[test]
    fn linear_member_is_p_c() {
        let result = brute_force_truncated_interior(1, 1, &params(), &frac(1, 10), DEFAULT_BUDGET).unwrap();
        let linear = result.policy(result.linear_index);
        assert!(linear.same_coloring(&Policy::linear(1).unwrap()));
        assert_eq!(result.linear_policy_risk, int(1));
        assert!(result.linear_is_minimizer);
        assert!(result.dominance_violations.is_empty());
        assert_eq!(result.enumerated, 729);
    }

    #[test]
    fn beta_above_epsilon_favors_stopping() {
        let result = brute_force_truncated_interior(1, 1, &params(), &frac(1, 5), DEFAULT_BUDGET).unwrap();
        // Stopping at the origin costs 1, while P_1 costs 1 + 2 (beta - eps).
        assert_eq!(result.best_risk, int(1));
        assert!(!result.linear_is_minimizer);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            brute_force_truncated_interior(1, 2, &params(), &frac(1, 10), 100),
            Err(Error::BudgetExceeded { needed: 19683, budget: 100 })
        ));
    }
}
