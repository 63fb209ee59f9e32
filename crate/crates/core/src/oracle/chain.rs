use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exact::{fmt_rational, serde_fraction, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSolution {
    /// Probability of absorption at `-a`.
    #[serde(with = "serde_fraction")]
    pub lower_prob: Rational,
    #[serde(with = "serde_fraction")]
    pub expected_time: Rational,
}

/// Solves the first-step equations of the walk on `{-a, ..., b}` started at 0
/// by exact Gaussian elimination. Unlike the closed form, `p = 1/2` is fine.
pub fn absorbing_chain_solve(a: u32, b: u32, p: &Rational) -> Result<ChainSolution> {
    if a == 0 || b == 0 {
        return Err(invalid(format!("boundary distances must be positive, got a={a}, b={b}")));
    }
    if *p <= Rational::zero() || *p >= Rational::one() {
        return Err(invalid(format!("p must lie in (0, 1), got {}", fmt_rational(p))));
    }
    let q = Rational::one() - p;
    // Unknown i is the state -a + 1 + i.
    let m = (a + b - 1) as usize;
    let start = (a - 1) as usize;
    let mut matrix = vec![vec![Rational::zero(); m]; m];
    // Two right-hand sides: absorption at -a, and expected time.
    let mut rhs = vec![[Rational::zero(), Rational::one()]; m];
    for i in 0..m {
        matrix[i][i] = Rational::one();
        if i + 1 < m {
            matrix[i][i + 1] = -p.clone();
        }
        if i > 0 {
            matrix[i][i - 1] = -q.clone();
        } else {
            rhs[i][0] = q.clone();
        }
    }
    let solution = solve(matrix, rhs);
    let [lower_prob, expected_time] = solution[start].clone();
    Ok(ChainSolution {
        lower_prob,
        expected_time,
    })
}

fn solve(mut a: Vec<Vec<Rational>>, mut rhs: Vec<[Rational; 2]>) -> Vec<[Rational; 2]> {
    let m = a.len();
    for col in 0..m {
        let pivot = (col..m)
            .find(|&r| !a[r][col].is_zero())
            .expect("first-step systems are nonsingular");
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in &mut a[col][col..] {
            *x *= &inv;
        }
        for v in rhs[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = a[col].clone();
        let pivot_rhs = rhs[col].clone();
        for r in 0..m {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= &factor * p;
            }
            for (x, p) in rhs[r].iter_mut().zip(&pivot_rhs) {
                *x -= &factor * p;
            }
        }
    }
    rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{frac, half, int};

    #[test]
    fn single_state() {
        let s = absorbing_chain_solve(1, 1, &frac(3, 5)).unwrap();
        assert_eq!(s.lower_prob, frac(2, 5));
        assert_eq!(s.expected_time, int(1));
    }

    #[test]
    fn symmetric_ruin() {
        for (a, b) in [(2, 2), (1, 3), (4, 2), (5, 5)] {
            let s = absorbing_chain_solve(a, b, &half()).unwrap();
            assert_eq!(s.lower_prob, frac(b as i64, (a + b) as i64));
            assert_eq!(s.expected_time, int((a * b) as i64));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(absorbing_chain_solve(0, 2, &half()).is_err());
        assert!(absorbing_chain_solve(2, 2, &int(1)).is_err());
    }
}
