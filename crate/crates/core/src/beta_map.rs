//! Tradeoff algebra: for which `beta` the linear policy `P_c` is Bayes optimal.
//!
//! Placing the hitting point at `h - t = c` pays off for `beta >= l_c`, and
//! erasing hitting points inside the channel pays off for `beta <= u_c`. The
//! intervals `[l_c, u_c]` tile `(0, eps]` with `u_1 = eps` and `l_c = u_{c+1}`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exact::{fmt_rational, int, powi, serde_fraction, Rational};
use crate::model::HypothesisParams;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaInterval {
    pub c: u32,
    #[serde(with = "serde_fraction")]
    pub lower: Rational,
    #[serde(with = "serde_fraction")]
    pub upper: Rational,
}

impl BetaInterval {
    pub fn new(c: u32, params: &HypothesisParams) -> Result<Self> {
        Ok(Self {
            c,
            lower: beta_lower(c, params)?,
            upper: beta_upper(c, params)?,
        })
    }

    pub fn contains(&self, beta: &Rational) -> bool {
        *beta >= self.lower && *beta <= self.upper
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lower + &self.upper) / int(2)
    }
}

/// Optimal policy family for a given `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Linear(u32),
    /// `P_0`: declare without tossing.
    DeclareImmediately,
}

fn check_c(c: u32) -> Result<()> {
    if c == 0 {
        Err(invalid("threshold c must be at least 1"))
    } else {
        Ok(())
    }
}

/// Numerator `2 eps alpha^c (alpha - 1)` shared by both bounds.
fn bound_numerator(c: u32, params: &HypothesisParams) -> (Rational, Rational) {
    let alpha = params.alpha();
    let alpha_c = powi(alpha, c as i64);
    let num = int(2) * params.epsilon() * &alpha_c * (alpha - Rational::one());
    (num, alpha_c)
}

/// `l_c = 2 eps a^c (a-1) / ((a^(c+1) - 1)(a^c + 1) + 2c a^c (a-1))`.
pub fn beta_lower(c: u32, params: &HypothesisParams) -> Result<Rational> {
    check_c(c)?;
    let alpha = params.alpha();
    let (num, alpha_c) = bound_numerator(c, params);
    let den = (&alpha_c * alpha - Rational::one()) * (&alpha_c + Rational::one())
        + int(2 * c as i64) * &alpha_c * (alpha - Rational::one());
    Ok(num / den)
}

/// `u_c = 2 eps a^c (a-1) / ((a^c - a)(a^c + 1) + 2c a^c (a-1))`.
pub fn beta_upper(c: u32, params: &HypothesisParams) -> Result<Rational> {
    check_c(c)?;
    let alpha = params.alpha();
    let (num, alpha_c) = bound_numerator(c, params);
    let den = (&alpha_c - alpha) * (&alpha_c + Rational::one())
        + int(2 * c as i64) * &alpha_c * (alpha - Rational::one());
    Ok(num / den)
}

/// Ratio of the change in `delta+ + delta-` to the change in `H+ + H-` when the
/// hitting point at offset `c_prime` from the diagonal is erased:
///
/// `g(c') = 2 eps (a^c - a^c') / (c' (a^c + 1)(a^c' - 1) - c (a^c - 1)(a^c' + 1))`.
pub fn g_ratio(c: u32, c_prime: u32, params: &HypothesisParams) -> Result<Rational> {
    check_c(c)?;
    if c_prime >= c {
        return Err(invalid(format!("c' must lie in [0, {}), got {c_prime}", c)));
    }
    let alpha = params.alpha();
    let one = Rational::one();
    let alpha_c = powi(alpha, c as i64);
    let alpha_cp = powi(alpha, c_prime as i64);
    let num = int(2) * params.epsilon() * (&alpha_c - &alpha_cp);
    let den = int(c_prime as i64) * (&alpha_c + &one) * (&alpha_cp - &one)
        - int(c as i64) * (&alpha_c - &one) * (&alpha_cp + &one);
    Ok(num / den)
}

/// Floating-point `g` for real-valued `c'`, for checking monotonicity between
/// the integer points.
pub fn g_ratio_f64(c: f64, c_prime: f64, epsilon: f64) -> f64 {
    let alpha = (1.0 + 2.0 * epsilon) / (1.0 - 2.0 * epsilon);
    let alpha_c = alpha.powf(c);
    let alpha_cp = alpha.powf(c_prime);
    2.0 * epsilon * (alpha_c - alpha_cp)
        / (c_prime * (alpha_c + 1.0) * (alpha_cp - 1.0) - c * (alpha_c - 1.0) * (alpha_cp + 1.0))
}

fn check_beta(beta: &Rational) -> Result<()> {
    if *beta <= Rational::zero() {
        Err(invalid(format!("beta must be positive, got {}", fmt_rational(beta))))
    } else {
        Ok(())
    }
}

/// The optimal policy for `beta`. At a shared endpoint `beta = l_c = u_{c+1}`
/// both `P_c` and `P_{c+1}` are optimal and `P_{c+1}` is returned.
pub fn choose_c(beta: &Rational, params: &HypothesisParams) -> Result<Decision> {
    check_beta(beta)?;
    if beta > params.epsilon() {
        return Ok(Decision::DeclareImmediately);
    }
    let mut c = 1u32;
    loop {
        let lower = beta_lower(c, params)?;
        if lower < *beta {
            return Ok(Decision::Linear(c));
        }
        if lower == *beta {
            return Ok(Decision::Linear(c + 1));
        }
        c += 1;
    }
}

/// Every optimal decision for `beta`: two thresholds at a shared endpoint, one
/// otherwise. At `beta = eps` this is `P_1` only: `P_0` ties with it there but
/// is reported only for `beta > eps`.
pub fn optimal_decisions(beta: &Rational, params: &HypothesisParams) -> Result<Vec<Decision>> {
    let chosen = choose_c(beta, params)?;
    Ok(match chosen {
        Decision::Linear(c) if c >= 2 && beta_upper(c, params)? == *beta => {
            vec![Decision::Linear(c - 1), Decision::Linear(c)]
        }
        other => vec![other],
    })
}

/// Rows `c = 1..=c_max` with a contiguity flag `l_c == u_{c+1}` per row.
pub fn interval_table(c_max: u32, params: &HypothesisParams) -> Result<Vec<(BetaInterval, bool)>> {
    check_c(c_max)?;
    let mut rows = Vec::with_capacity(c_max as usize);
    let mut next = BetaInterval::new(1, params)?;
    for c in 1..=c_max {
        let current = next;
        next = BetaInterval::new(c + 1, params)?;
        let contiguous = current.lower == next.upper && current.lower < current.upper;
        rows.push((current, contiguous));
    }
    Ok(rows)
}
