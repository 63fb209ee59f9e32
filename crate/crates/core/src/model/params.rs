use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exact::{fmt_rational, half, int, Rational};

/// Which of the two coin biases generated the tosses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    /// Heads with probability `1/2 + eps`.
    Plus,
    /// Heads with probability `1/2 - eps`.
    Minus,
}

impl Hypothesis {
    pub const BOTH: [Hypothesis; 2] = [Hypothesis::Plus, Hypothesis::Minus];
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::Plus => "plus",
            Hypothesis::Minus => "minus",
        })
    }
}

impl std::str::FromStr for Hypothesis {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Hypothesis::Plus),
            "minus" | "-" => Ok(Hypothesis::Minus),
            other => Err(invalid(format!("unknown hypothesis {other:?}"))),
        }
    }
}

/// The bias gap `eps` of the symmetric hypotheses `1/2 +- eps`, with the odds
/// ratio `alpha = (1 + 2 eps) / (1 - 2 eps)` cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisParams {
    epsilon: Rational,
    alpha: Rational,
}

impl HypothesisParams {
    pub fn new(epsilon: Rational) -> Result<Self> {
        if epsilon <= Rational::zero() || epsilon >= half() {
            return Err(invalid(format!(
                "epsilon must lie in (0, 1/2), got {}",
                fmt_rational(&epsilon)
            )));
        }
        let two_eps = &epsilon * int(2);
        let alpha = (Rational::one() + &two_eps) / (Rational::one() - &two_eps);
        Ok(Self { epsilon, alpha })
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    /// Probability of heads under `hypothesis`.
    pub fn heads_probability(&self, hypothesis: Hypothesis) -> Rational {
        match hypothesis {
            Hypothesis::Plus => half() + &self.epsilon,
            Hypothesis::Minus => half() - &self.epsilon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::frac;

    #[test]
    fn alpha_from_epsilon() {
        let p = HypothesisParams::new(frac(1, 10)).unwrap();
        assert_eq!(p.alpha(), &frac(3, 2));
        assert_eq!(p.heads_probability(Hypothesis::Plus), frac(3, 5));
        assert_eq!(p.heads_probability(Hypothesis::Minus), frac(2, 5));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(HypothesisParams::new(int(0)).is_err());
        assert!(HypothesisParams::new(half()).is_err());
        assert!(HypothesisParams::new(frac(-1, 10)).is_err());
        assert!(HypothesisParams::new(frac(49, 100)).is_ok());
    }
}
