//! Exact rational values.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// An exact rational number in canonical reduced form with positive
/// denominator. Moment exponents can be negative, so every moment-engine
/// result is carried as one of these; floating point appears only through
/// [`ExactValue::to_f64`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactValue(BigRational);

impl ExactValue {
    pub fn zero() -> Self {
        ExactValue(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactValue(BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        ExactValue(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_ratio(num: i64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        ExactValue(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(r: BigRational) -> Self {
        ExactValue(r)
    }

    /// `base^exp` with a signed integer exponent; `base` must be positive
    /// when `exp < 0`.
    pub fn int_pow(base: u64, exp: i64) -> Self {
        let b = BigInt::from(base);
        if exp >= 0 {
            ExactValue(BigRational::from_integer(b.pow(exp as u32)))
        } else {
            assert!(base != 0, "negative power of zero");
            ExactValue(BigRational::new(BigInt::one(), b.pow((-exp) as u32)))
        }
    }

    /// `self^exp` for a non-negative exponent.
    pub fn pow(&self, exp: u32) -> Self {
        let mut out = ExactValue::one();
        for _ in 0..exp {
            out = &out * self;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        ExactValue(self.0.abs())
    }

    pub fn rational(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            let num = big_to_f64(self.0.numer());
            let den = big_to_f64(self.0.denom());
            num / den
        })
    }

    /// Parses `"n"`, `"n/d"`, or a plain decimal such as `"0.25"` exactly.
    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|e| format!("{e}"))?;
            let den: BigInt = den.trim().parse().map_err(|e| format!("{e}"))?;
            if den.is_zero() {
                return Err("zero denominator".into());
            }
            return Ok(ExactValue(BigRational::new(num, den)));
        }
        if let Some((whole, frac)) = text.split_once('.') {
            let sign = if whole.trim_start().starts_with('-') { -1 } else { 1 };
            let whole: BigInt = whole.parse().map_err(|e| format!("{e}"))?;
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(format!("bad decimal {text:?}"));
            }
            let digits: BigInt = frac.parse().map_err(|e| format!("{e}"))?;
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let frac_part = BigRational::new(digits * sign, scale);
            return Ok(ExactValue(BigRational::from_integer(whole) + frac_part));
        }
        let n: BigInt = text.parse().map_err(|e| format!("{e}"))?;
        Ok(ExactValue(BigRational::from_integer(n)))
    }
}

fn big_to_f64(b: &BigInt) -> f64 {
    b.to_f64().unwrap_or(match b.sign() {
        Sign::Minus => f64::NEG_INFINITY,
        _ => f64::INFINITY,
    })
}

impl fmt::Display for ExactValue {
    /// Renders `55/36`, or just `2` when the value is an integer.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for ExactValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

macro_rules! binop {
    ($trait:ident, $fn:ident, $op:tt) => {
        impl $trait for &ExactValue {
            type Output = ExactValue;
            fn $fn(self, rhs: &ExactValue) -> ExactValue {
                ExactValue(&self.0 $op &rhs.0)
            }
        }
        impl $trait for ExactValue {
            type Output = ExactValue;
            fn $fn(self, rhs: ExactValue) -> ExactValue {
                ExactValue(self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Div for &ExactValue {
    type Output = ExactValue;
    fn div(self, rhs: &ExactValue) -> ExactValue {
        assert!(!rhs.is_zero(), "division by zero");
        ExactValue(&self.0 / &rhs.0)
    }
}

impl Neg for ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        ExactValue(-self.0)
    }
}

impl Neg for &ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        ExactValue(-self.0.clone())
    }
}

impl AddAssign<&ExactValue> for ExactValue {
    fn add_assign(&mut self, rhs: &ExactValue) {
        self.0 += &rhs.0;
    }
}

impl Sum for ExactValue {
    fn sum<I: Iterator<Item = ExactValue>>(iter: I) -> ExactValue {
        let mut acc = ExactValue::zero();
        for v in iter {
            acc += &v;
        }
        acc
    }
}
