//! Probability values: exact rationals by default, `f64` as the fallback mode.
//!
//! All mass arithmetic (sums, products, conditioning) happens in the value
//! type `P: Prob`. Logarithms are always taken in double precision, so
//! information measures come out as `f64` bits in both modes. The payoff of
//! the exact mode is that ratios of masses that are equal to one stay equal
//! to one, which turns statements like `I(U;S) = 0` into bit-for-bit zeros.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Scalar type for probability masses.
///
/// Implemented by [`BigRational`] (exact mode) and `f64` (float mode).
pub trait Prob:
    Clone
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic in this type is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;

    /// The fraction `num/den`. Panics if `den == 0`.
    fn from_ratio(num: u64, den: u64) -> Self;

    /// Exact conversion from a finite nonnegative `f64`.
    fn from_f64_exact(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Parse either a fraction `"a/b"` or a plain decimal such as `"0.125"`.
    /// Decimals convert exactly in exact mode (`0.1` becomes `1/10`).
    fn parse(text: &str) -> Result<Self>;

    /// Canonical text form: `"a/b"` in exact mode, shortest decimal otherwise.
    fn render(&self) -> String;
}

impl Prob for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64_exact(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).expect("rational fits in f64 range")
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text)
    }

    fn render(&self) -> String {
        if self.denom().is_one() {
            format!("{}", self.numer())
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Prob for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn from_f64_exact(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse(text: &str) -> Result<Self> {
        Ok(Prob::to_f64(&parse_rational(text)?))
    }

    fn render(&self) -> String {
        format!("{self}")
    }
}

/// Parse `"a/b"`, an integer, or a finite decimal into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::Invalid(format!("cannot parse probability from {t:?}"));
    let value = if let Some((a, b)) = t.split_once('/') {
        let num = BigInt::from_str(a.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(b.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        BigRational::new(num, den)
    } else if let Some((int_part, frac_part)) = t.split_once('.') {
        let int_part = if int_part.is_empty() { "0" } else { int_part };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole = BigInt::from_str(int_part).map_err(|_| bad())?;
        let frac = BigInt::from_str(frac_part).map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let sign = if t.starts_with('-') {
            BigInt::from(-1)
        } else {
            BigInt::from(1)
        };
        BigRational::from_integer(whole) + BigRational::new(sign * frac, scale)
    } else {
        BigRational::from_integer(BigInt::from_str(t).map_err(|_| bad())?)
    };
    if value.is_negative() {
        return Err(Error::NegativeMass {
            cell: String::from("(scalar)"),
            value: t.to_string(),
        });
    }
    Ok(value)
}

/// Largest multiple of `2^-40` at or below `x * (1 - 1e-12)`, clamped to
/// `[0, 1]`. Exactly representable both as an `f64` and as a rational.
///
/// Used to pick an erasure probability that provably stays below an
/// irrational ratio like `r / H(X|S)` computed in floats, so the rate
/// constraint holds with exact arithmetic downstream.
pub fn dyadic_below(x: f64) -> f64 {
    let shrunk = (x * (1.0 - 1e-12)).clamp(0.0, 1.0);
    let den = (1u64 << 40) as f64;
    (shrunk * den).floor().min(den).max(0.0) / den
}
