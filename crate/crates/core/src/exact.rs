//! Helpers around [`BigRational`]: parsing, exponentiation and display.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn half() -> Rational {
    frac(1, 2)
}

/// `base^exp` for any integer exponent; `base` must be nonzero when `exp < 0`.
pub fn powi(base: &Rational, exp: i64) -> Rational {
    if exp == 0 {
        return Rational::one();
    }
    let e = i32::try_from(exp).expect("exponent out of range");
    Pow::pow(base, e)
}

/// Parses `"num/den"`, an integer, or a finite decimal such as `"0.05"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(invalid("empty rational"));
    }
    if s.contains('/') {
        let (n, d) = s.split_once('/').unwrap();
        let n = BigInt::from_str(n.trim()).map_err(|_| invalid(format!("bad numerator in {s:?}")))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| invalid(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(invalid(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, fractional)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !fractional.chars().all(|ch| ch.is_ascii_digit())
            || !whole_digits.chars().all(|ch| ch.is_ascii_digit())
            || (whole_digits.is_empty() && fractional.is_empty())
        {
            return Err(invalid(format!("bad decimal {s:?}")));
        }
        let digits = format!("{whole_digits}{fractional}");
        let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).unwrap();
        let d = Pow::pow(BigInt::from(10u32), fractional.len() as u32);
        let r = Rational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    BigInt::from_str(s)
        .map(Rational::from_integer)
        .map_err(|_| invalid(format!("not a rational: {s:?}")))
}

/// Canonical `num/den` form; integers print without a denominator.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Decimal rendering with `sig` significant digits, trailing zeros trimmed.
pub fn fmt_decimal(r: &Rational, sig: usize) -> String {
    fmt_f64(to_f64(r), sig)
}

pub fn fmt_f64(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-6..=15).contains(&exp) {
        return format!("{:.*e}", sig.saturating_sub(1), x);
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

/// Serde adapter writing rationals as `num/den` strings.
pub mod serde_fraction {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use super::{fmt_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_rational("1/10").unwrap(), frac(1, 10));
        assert_eq!(parse_rational("0.1").unwrap(), frac(1, 10));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational(" 6/185 ").unwrap(), frac(6, 185));
        assert_eq!(parse_rational(".5").unwrap(), half());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn negative_powers() {
        assert_eq!(powi(&frac(3, 2), -2), frac(4, 9));
        assert_eq!(powi(&frac(3, 2), 0), int(1));
    }

    #[test]
    fn decimal_display() {
        assert_eq!(fmt_decimal(&frac(2, 5), 12), "0.4");
        assert_eq!(fmt_decimal(&frac(4, 13), 12), "0.307692307692");
        assert_eq!(fmt_decimal(&frac(50, 13), 12), "3.84615384615");
        assert_eq!(fmt_rational(&frac(6, 185)), "6/185");
        assert_eq!(fmt_rational(&int(1)), "1");
    }
}
