//! Field abstraction shared by every computation in the crate.
//!
//! Two kinds of instantiation exist: exact rationals ([`BigRational`]) and
//! IEEE floats (`f64`, `f32`). Exact arithmetic cannot evaluate `exp` or
//! `ln` except at the trivial points, so those return `None` and callers
//! surface a numeric-mode conflict.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// `exp(-x)`, or `None` when not representable in this field.
    fn exp_neg(x: &Self) -> Option<Self>;

    /// Natural logarithm, or `None` when not representable.
    fn ln(&self) -> Option<Self>;

    /// Default comparison tolerance: zero for exact fields.
    fn default_tol() -> Self;

    /// Parse an integer, decimal (`0.693`, `1e-3`) or fraction (`3/4`).
    fn parse_text(s: &str) -> Option<Self>;

    /// Lossless textual form.
    fn to_text(&self) -> String;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("i64 fits") / Self::from_i64(den).expect("i64 fits")
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits")
    }

    fn powu(&self, n: u32) -> Self {
        num_traits::pow(self.clone(), n as usize)
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `|self - other| <= tol`.
    fn within(&self, other: &Self, tol: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= *tol
    }
}

fn split_fraction(s: &str) -> Option<(&str, &str)> {
    let (a, b) = s.split_once('/')?;
    Some((a.trim(), b.trim()))
}

/// Strictly above zero; false for NaN.
pub(crate) fn positive<S: Scalar>(x: &S) -> bool {
    *x > S::zero()
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn exp_neg(x: &Self) -> Option<Self> {
                Some((-*x).exp())
            }

            fn ln(&self) -> Option<Self> {
                if *self > 0.0 {
                    Some(<$t>::ln(*self))
                } else {
                    None
                }
            }

            fn default_tol() -> Self {
                $tol
            }

            fn parse_text(s: &str) -> Option<Self> {
                let s = s.trim();
                if let Some((a, b)) = split_fraction(s) {
                    let a: $t = a.parse().ok()?;
                    let b: $t = b.parse().ok()?;
                    return Some(a / b);
                }
                s.parse().ok()
            }

            fn to_text(&self) -> String {
                format!("{}", self)
            }
        }
    };
}

float_scalar!(f64, 1e-10);
float_scalar!(f32, 1e-5);

/// Exact decimal parse: `[-+]digits[.digits][e[-+]digits]`.
fn parse_decimal_rational(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
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
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn exp_neg(x: &Self) -> Option<Self> {
        x.is_zero().then(Self::one)
    }

    fn ln(&self) -> Option<Self> {
        self.is_one().then(Self::zero)
    }

    fn default_tol() -> Self {
        Self::zero()
    }

    fn parse_text(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((a, b)) = split_fraction(s) {
            let a = parse_decimal_rational(a)?;
            let b = parse_decimal_rational(b)?;
            if b.is_zero() {
                return None;
            }
            return Some(a / b);
        }
        parse_decimal_rational(s)
    }

    fn to_text(&self) -> String {
        format!("{}", self)
    }
}

/// A value in `(0, +inf]`, the range of edge and vertex partition functions.
#[derive(Clone, Debug, PartialEq)]
pub enum Extended<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> Extended<S> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    pub fn zero() -> Self {
        Extended::Finite(S::zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a.clone() + b.clone()),
            _ => Extended::Infinite,
        }
    }

    /// Product with the convention `0 * inf = 0` (an absent term stays absent).
    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a.clone() * b.clone()),
            (Extended::Finite(a), Extended::Infinite)
            | (Extended::Infinite, Extended::Finite(a))
                if a.is_zero() =>
            {
                Extended::zero()
            }
            _ => Extended::Infinite,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Extended::Finite(v) => v.to_text(),
            Extended::Infinite => "inf".to_string(),
        }
    }
}

impl<S: Scalar> Display for Extended<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}
