use std::collections::HashMap;

use num_traits::One;

use super::chain::absorbing_chain_solve;
use crate::error::{invalid, Result};
use crate::exact::{int, powi, Rational};
use crate::model::{Closure, Color, Hypothesis, HypothesisParams, Policy, Profile};

pub const MAX_ENUMERATION_DEPTH: usize = 22;

/// Where a single toss sequence ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Exit {
    Stop(Color),
    /// Entered the linear tail at a White cell.
    Channel,
}

/// Exact profile by walking every toss sequence one at a time. Sequences that
/// enter a linear-tail channel are finished with [`absorbing_chain_solve`].
pub fn enumerate_paths_profile(policy: &Policy, params: &HypothesisParams, max_depth: usize) -> Result<Profile> {
    if max_depth > MAX_ENUMERATION_DEPTH {
        return Err(invalid(format!("max_depth {max_depth} exceeds {MAX_ENUMERATION_DEPTH}")));
    }
    let horizon = policy.horizon();
    let tail_c = match policy.closure() {
        Closure::LinearTail { c } => Some(c),
        Closure::ForcedStop => None,
    };

    // Number of sequences ending at each cell, by exit kind.
    let mut endings: HashMap<(usize, usize, Exit), u64> = HashMap::new();
    let mut stack = vec![(0usize, 0usize)];
    while let Some((h, t)) = stack.pop() {
        let color = policy.color_at(h, t);
        let exit = match color {
            Color::White if h + t >= horizon && tail_c.is_some() => Some(Exit::Channel),
            Color::White => None,
            stop => Some(Exit::Stop(stop)),
        };
        match exit {
            Some(exit) => *endings.entry((h, t, exit)).or_default() += 1,
            None => {
                if h + t >= max_depth {
                    return Err(invalid(format!(
                        "cell ({h}, {t}) is still active at depth {max_depth}"
                    )));
                }
                stack.push((h + 1, t));
                stack.push((h, t + 1));
            }
        }
    }

    let mut sums: [[Rational; 2]; 2] = Default::default();
    for (index, hyp) in Hypothesis::BOTH.iter().enumerate() {
        let p = params.heads_probability(*hyp);
        let q = Rational::one() - &p;
        let wrong = match hyp {
            Hypothesis::Plus => Color::Red,
            Hypothesis::Minus => Color::Blue,
        };
        let [delta, time] = &mut sums[index];
        for (&(h, t, exit), &count) in &endings {
            let prob = int(count as i64) * powi(&p, h as i64) * powi(&q, t as i64);
            let steps = int((h + t) as i64);
            match exit {
                Exit::Stop(color) => {
                    if color == wrong {
                        *delta += &prob;
                    }
                    *time += prob * steps;
                }
                Exit::Channel => {
                    let c = tail_c.expect("channel exits need a linear tail") as i64;
                    let offset = h as i64 - t as i64;
                    let solved = absorbing_chain_solve((c + offset) as u32, (c - offset) as u32, &p)?;
                    let wrong_prob = match hyp {
                        Hypothesis::Plus => solved.lower_prob,
                        Hypothesis::Minus => Rational::one() - solved.lower_prob,
                    };
                    *delta += &prob * wrong_prob;
                    *time += prob * (steps + solved.expected_time);
                }
            }
        }
    }
    let [[delta_plus, h_plus], [delta_minus, h_minus]] = sums;
    Profile::new(delta_plus, delta_minus, h_plus, h_minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::profile_exact;
    use crate::exact::frac;

    fn params() -> HypothesisParams {
        HypothesisParams::new(frac(1, 10)).unwrap()
    }

    #[test]
    fn linear_two_matches() {
        let p2 = Policy::linear(2).unwrap();
        let profile = enumerate_paths_profile(&p2, &params(), 10).unwrap();
        assert_eq!(profile, Profile::new(frac(4, 13), frac(4, 13), frac(50, 13), frac(50, 13)).unwrap());
        assert_eq!(profile, profile_exact(&p2, &params()));
    }

    #[test]
    fn single_toss() {
        let policy = Policy::from_fn(1, Closure::ForcedStop, |_, _| Color::White).unwrap();
        let profile = enumerate_paths_profile(&policy, &params(), 4).unwrap();
        assert_eq!(profile, Profile::new(frac(2, 5), frac(2, 5), int(1), int(1)).unwrap());
    }

    #[test]
    fn declare_immediately() {
        let profile = enumerate_paths_profile(&Policy::declare_immediately(), &params(), 0).unwrap();
        assert_eq!(profile, Profile::new(int(0), int(1), int(0), int(0)).unwrap());
    }

    #[test]
    fn rejects_deep_policies() {
        let deep = Policy::from_fn(8, Closure::ForcedStop, |_, _| Color::White).unwrap();
        assert!(enumerate_paths_profile(&deep, &params(), 5).is_err());
        assert!(enumerate_paths_profile(&deep, &params(), 23).is_err());
    }
}
