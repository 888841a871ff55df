//! Numeric modes shared by every computation in the crate.
//!
//! All formulas are generic over [`Scalar`]. Exact arithmetic uses
//! [`Rational`] (arbitrary precision, always reduced); fast arithmetic uses
//! `f64`. A single computation never mixes the two: the mode is fixed by the
//! type parameter.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, NumAssign, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exact rational number in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Absolute tolerance used when float-mode values are compared for equality
/// (normalization, round-trip checks, sign classification).
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    Rational,
    Float,
}

impl NumericMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NumericMode::Rational => "rational",
            NumericMode::Float => "float",
        }
    }
}

impl Display for NumericMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NumericMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(NumericMode::Rational),
            "float" => Ok(NumericMode::Float),
            other => Err(format!(
                "unknown numeric mode `{other}` (expected rational|float)"
            )),
        }
    }
}

/// Number field contract for all formulas.
pub trait Scalar:
    Num + NumAssign + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    const MODE: NumericMode;

    fn from_i64(n: i64) -> Self;

    fn from_u64(n: u64) -> Self;

    /// Exact for rationals, nearest double for floats.
    fn from_rational(r: &Rational) -> Self;

    /// Exact binary value of `x` for rationals.
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Equality in the mode's sense: exact for rationals, within
    /// [`FLOAT_TOLERANCE`] (absolute, scaled by magnitude above 1) for floats.
    fn close_to(&self, other: &Self) -> bool;

    /// Strictly below zero, beyond rounding noise in float mode.
    fn is_definitely_negative(&self) -> bool;

    fn factorial(n: usize) -> Self {
        (1..=n as u64).fold(Self::one(), |acc, k| acc * Self::from_u64(k))
    }

    fn powi(&self, exp: usize) -> Self {
        let mut out = Self::one();
        for _ in 0..exp {
            out *= self.clone();
        }
        out
    }
}

impl Scalar for Rational {
    const MODE: NumericMode = NumericMode::Rational;

    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn from_u64(n: u64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).unwrap_or_else(Rational::zero)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn close_to(&self, other: &Self) -> bool {
        self == other
    }

    fn is_definitely_negative(&self) -> bool {
        self.is_negative()
    }
}

impl Scalar for f64 {
    const MODE: NumericMode = NumericMode::Float;

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn from_u64(n: u64) -> Self {
        n as f64
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn close_to(&self, other: &Self) -> bool {
        let scale = 1f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= FLOAT_TOLERANCE * scale
    }

    fn is_definitely_negative(&self) -> bool {
        *self < -FLOAT_TOLERANCE
    }
}

/// Parses `"p/q"`, `"p"`, or a plain decimal such as `"0.25"` / `"-1e-3"`
/// into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if text.contains('/') {
        let r = Rational::from_str(text).ok()?;
        return Some(r);
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str_radix(&all_digits, 10).ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// `"p/q"` for non-integers, `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
