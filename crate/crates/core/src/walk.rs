//! Closed forms for a +-1 walk on `h - t` absorbed at `-a` or `+b`.

use num_traits::One;

use crate::error::{invalid, Result};
use crate::exact::{fmt_rational, half, int, powi, Rational};

/// A walk started at 0 with up-step probability `p`, absorbed at `-a` and `+b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryPair {
    a: u32,
    b: u32,
    p: Rational,
    r: Rational,
}

impl BoundaryPair {
    /// Rejects `a == 0`, `b == 0`, `p` outside `(0, 1)`, and `p == 1/2`.
    pub fn new(a: u32, b: u32, p: Rational) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(invalid(format!("boundary distances must be positive, got a={a}, b={b}")));
        }
        if p <= int(0) || p >= int(1) {
            return Err(invalid(format!("p must lie in (0, 1), got {}", fmt_rational(&p))));
        }
        if p == half() {
            return Err(invalid("p = 1/2 makes the closed form degenerate"));
        }
        let r = p.recip() - Rational::one();
        Ok(Self { a, b, p, r })
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    /// `r = 1/p - 1`, the down/up odds.
    pub fn r(&self) -> &Rational {
        &self.r
    }

    /// Probability of absorption at `-a`: `(1 - r^b) / (r^-a - r^b)`.
    pub fn lower_hit_probability(&self) -> Rational {
        let r_b = powi(&self.r, self.b as i64);
        let r_neg_a = powi(&self.r, -(self.a as i64));
        (Rational::one() - &r_b) / (r_neg_a - r_b)
    }

    pub fn upper_hit_probability(&self) -> Rational {
        Rational::one() - self.lower_hit_probability()
    }

    /// `E[T] = (b - (a + b) P[-a]) / (2p - 1)`.
    pub fn expected_hitting_time(&self) -> Rational {
        let a = int(self.a as i64);
        let b = int(self.b as i64);
        let drift = &self.p * int(2) - Rational::one();
        (&b - (a + &b) * self.lower_hit_probability()) / drift
    }
}

/// Upper bound `c^2` on the expected absorption time when `a + b = 2c`.
pub fn channel_time_bound(c: u32) -> Rational {
    let c = int(c as i64);
    &c * &c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::frac;

    fn bp(a: u32, b: u32, p: Rational) -> BoundaryPair {
        BoundaryPair::new(a, b, p).unwrap()
    }

    #[test]
    fn single_step_channel() {
        for p in [frac(3, 5), frac(11, 20), frac(7, 10), frac(1, 5)] {
            let w = bp(1, 1, p.clone());
            assert_eq!(w.lower_hit_probability(), Rational::one() - &p);
            assert_eq!(w.expected_hitting_time(), int(1));
        }
    }

    #[test]
    fn width_four_channel() {
        // Values from first-step analysis on the chain {-2, ..., 2}.
        let w = bp(2, 2, frac(3, 5));
        assert_eq!(w.lower_hit_probability(), frac(4, 13));
        assert_eq!(w.expected_hitting_time(), frac(50, 13));
    }

    #[test]
    fn asymmetric_channel() {
        // First-step equations on the chain {-3, ..., 1} with p = 3/5, solved by hand.
        let w = bp(3, 1, frac(3, 5));
        assert_eq!(w.lower_hit_probability(), frac(8, 65));
        assert_eq!(w.upper_hit_probability(), frac(57, 65));
        assert_eq!(w.expected_hitting_time(), frac(33, 13));
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(BoundaryPair::new(0, 1, frac(3, 5)).is_err());
        assert!(BoundaryPair::new(1, 0, frac(3, 5)).is_err());
        assert!(BoundaryPair::new(1, 1, half()).is_err());
        assert!(BoundaryPair::new(1, 1, int(1)).is_err());
        assert!(BoundaryPair::new(1, 1, int(0)).is_err());
    }

    #[test]
    fn channel_bound_values() {
        assert_eq!(channel_time_bound(1), int(1));
        assert_eq!(channel_time_bound(3), int(9));
    }
}
