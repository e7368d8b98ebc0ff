//! Scalar fields used for group coordinates.
//!
//! Every group computation is generic over [`Scalar`] so the same code runs
//! in exact rational arithmetic (for algebraic identities) and in `f64` (for
//! estimation work).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number.
pub type Rational = BigRational;

/// A constant carried in both exact and floating form so generic code can
/// pick whichever its scalar type needs without converting on every use.
#[derive(Clone, Debug, PartialEq)]
pub struct Coeff {
    pub exact: Rational,
    pub approx: f64,
}

impl Coeff {
    pub fn new(exact: Rational) -> Self {
        let approx = ToPrimitive::to_f64(&exact).unwrap_or(f64::NAN);
        Coeff { exact, approx }
    }

    pub fn from_int(v: i64) -> Self {
        Coeff::new(Rational::from_integer(BigInt::from(v)))
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_zero()
    }
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Whether arithmetic in this type is exact.
    const EXACT: bool;

    fn from_coeff(c: &Coeff) -> Self;

    /// `num / den`; `den` must be nonzero.
    fn ratio(num: i64, den: i64) -> Self;

    /// Exact for rationals: every finite double is a dyadic rational.
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Exact for rationals; the dyadic value of the double otherwise.
    fn to_coeff(&self) -> Coeff;

    /// Zero test: exact for rationals, `|x| <= tol` for floats.
    fn is_negligible(&self, tol: f64) -> bool;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_coeff(c: &Coeff) -> Self {
        c.approx
    }

    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_coeff(&self) -> Coeff {
        Coeff { exact: Rational::from_float(*self).expect("finite value"), approx: *self }
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_coeff(c: &Coeff) -> Self {
        c.exact.clone()
    }

    fn ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).expect("finite coordinate")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_coeff(&self) -> Coeff {
        Coeff::new(self.clone())
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid number literal `{0}`")]
pub struct NumberParseError(pub String);

/// Parse an exact rational from `3`, `-1/2`, `0.25`, `1e-3` or `2.5e2`.
pub fn parse_rational(text: &str) -> Result<Rational, NumberParseError> {
    let s = text.trim();
    let err = || NumberParseError(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(num / den);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(&all_digits).map_err(|_| err())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Render a rational as `n` or `n/d`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn max_abs<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn parses_literals_exactly() {
        assert_eq!(parse_rational("3").unwrap(), q(3, 1));
        assert_eq!(parse_rational("-1/2").unwrap(), q(-1, 2));
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_rational("2.5e2").unwrap(), q(250, 1));
        assert_eq!(parse_rational("+.5").unwrap(), q(1, 2));
        assert_eq!(parse_rational("1.5/3").unwrap(), q(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1/0", "1..2", "-", "3x", "1e"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn float_conversion_is_exact() {
        let x = 0.1_f64;
        let r = Rational::from_f64(x);
        assert_eq!(Scalar::to_f64(&r), x);
        assert_ne!(r, q(1, 10));
    }

    #[test]
    fn formatting() {
        assert_eq!(format_rational(&q(4, 2)), "2");
        assert_eq!(format_rational(&q(-1, 3)), "-1/3");
    }
}
