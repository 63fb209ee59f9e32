use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exact::{fmt_rational, serde_fraction, Rational};

/// Error probabilities and expected toss counts of a policy under each
/// hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Profile {
    /// Probability of declaring `1/2 - eps` when the coin is `1/2 + eps`.
    #[serde(with = "serde_fraction")]
    pub delta_plus: Rational,
    /// Probability of declaring `1/2 + eps` when the coin is `1/2 - eps`.
    #[serde(with = "serde_fraction")]
    pub delta_minus: Rational,
    #[serde(with = "serde_fraction")]
    pub h_plus: Rational,
    #[serde(with = "serde_fraction")]
    pub h_minus: Rational,
}

impl Profile {
    pub fn new(
        delta_plus: Rational,
        delta_minus: Rational,
        h_plus: Rational,
        h_minus: Rational,
    ) -> Result<Self> {
        let unit = |x: &Rational| *x >= Rational::zero() && *x <= Rational::one();
        if !unit(&delta_plus) || !unit(&delta_minus) {
            return Err(invalid("error probabilities must lie in [0, 1]"));
        }
        if h_plus < Rational::zero() || h_minus < Rational::zero() {
            return Err(invalid("expected toss counts must be nonnegative"));
        }
        Ok(Self {
            delta_plus,
            delta_minus,
            h_plus,
            h_minus,
        })
    }

    pub fn delta_sum(&self) -> Rational {
        &self.delta_plus + &self.delta_minus
    }

    pub fn time_sum(&self) -> Rational {
        &self.h_plus + &self.h_minus
    }
}

/// `(delta+ + delta-) + beta * (H+ + H-)`.
pub fn bayes_risk(profile: &Profile, beta: &Rational) -> Result<Rational> {
    if *beta <= Rational::zero() {
        return Err(invalid(format!(
            "beta must be positive, got {}",
            fmt_rational(beta)
        )));
    }
    Ok(profile.delta_sum() + beta * profile.time_sum())
}
