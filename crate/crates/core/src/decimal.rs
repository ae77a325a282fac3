//! Exact decimal amounts for the accounting layer.
//!
//! Ledger identities are compared with `==`, so nothing here rounds. Floating
//! point only appears when a value leaves the ledger via [`Decimal::to_f64`].

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use bigdecimal::num_bigint::{BigInt, Sign};
use bigdecimal::{BigDecimal, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Maximum number of significant digits accepted from external input.
pub const MAX_SIGNIFICANT_DIGITS: usize = 38;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecimalError {
    #[error("empty number")]
    Empty,
    #[error("malformed decimal {0:?}")]
    Malformed(String),
    #[error("negative value {0:?}")]
    Negative(String),
    #[error("{digits} significant digits exceeds the limit of {MAX_SIGNIFICANT_DIGITS}")]
    TooPrecise { digits: usize },
}

#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decimal(BigDecimal);

impl Decimal {
    pub fn zero() -> Self {
        Decimal(BigDecimal::zero())
    }

    pub fn from_int(v: i64) -> Self {
        Decimal(BigDecimal::from(v))
    }

    /// Parses a plain non-negative decimal (`123`, `0.25`). Signs, exponents and
    /// more than [`MAX_SIGNIFICANT_DIGITS`] significant digits are rejected.
    pub fn parse_amount(s: &str) -> Result<Self, DecimalError> {
        let d = Self::from_str(s)?;
        if d.is_negative() {
            return Err(DecimalError::Negative(s.to_string()));
        }
        Ok(d)
    }

    /// Rounds `x` half-away-from-zero to `places` fractional digits.
    pub fn from_f64_rounded(x: f64, places: usize) -> Self {
        assert!(x.is_finite(), "non-finite value {x}");
        let text = format!("{x:.places$}");
        text.parse().expect("formatted float is a valid decimal")
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.sign() == Sign::Minus
    }

    pub fn is_positive(&self) -> bool {
        self.0.sign() == Sign::Plus
    }

    /// Nearest `f64` (correctly rounded through the decimal text form).
    pub fn to_f64(&self) -> f64 {
        self.to_string().parse().expect("plain decimal parses as f64")
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Truncates toward zero to `places` fractional digits.
    pub fn truncate(&self, places: i64) -> Self {
        Decimal(self.0.with_scale_round(places, bigdecimal::RoundingMode::Down))
    }
}

impl FromStr for Decimal {
    type Err = DecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(DecimalError::Empty);
        }
        let body = s.strip_prefix('-').unwrap_or(s);
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        let digits_ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if int_part.is_empty()
            || !digits_ok(int_part)
            || !digits_ok(frac_part)
            || (body.contains('.') && frac_part.is_empty())
        {
            return Err(DecimalError::Malformed(s.to_string()));
        }
        let all: String = format!("{int_part}{frac_part}");
        let significant = all
            .trim_start_matches('0')
            .trim_end_matches('0')
            .len();
        if significant > MAX_SIGNIFICANT_DIGITS {
            return Err(DecimalError::TooPrecise {
                digits: significant,
            });
        }
        let value = BigDecimal::from_str(s).map_err(|_| DecimalError::Malformed(s.to_string()))?;
        Ok(Decimal(value))
    }
}

impl fmt::Display for Decimal {
    /// Plain notation with trailing fractional zeros removed; never exponential.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (int, scale) = self.0.normalized().into_bigint_and_exponent();
        let negative = int.sign() == Sign::Minus;
        let digits = int.magnitude().to_string();
        let mut out = String::with_capacity(digits.len() + 4);
        if negative {
            out.push('-');
        }
        match scale.cmp(&0) {
            Ordering::Less | Ordering::Equal => {
                out.push_str(&digits);
                if digits != "0" {
                    out.extend(std::iter::repeat('0').take((-scale) as usize));
                }
            }
            Ordering::Greater => {
                let scale = scale as usize;
                let padded = if digits.len() <= scale {
                    format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits)
                } else {
                    digits
                };
                let split = padded.len() - scale;
                out.push_str(&padded[..split]);
                out.push('.');
                out.push_str(&padded[split..]);
            }
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl From<i64> for Decimal {
    fn from(v: i64) -> Self {
        Decimal::from_int(v)
    }
}

impl From<BigInt> for Decimal {
    fn from(v: BigInt) -> Self {
        Decimal(BigDecimal::from(v))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr for Decimal {
            type Output = Decimal;
            fn $method(self, rhs: Decimal) -> Decimal {
                Decimal(self.0 $op rhs.0)
            }
        }
        impl<'a> $tr<&'a Decimal> for &'a Decimal {
            type Output = Decimal;
            fn $method(self, rhs: &'a Decimal) -> Decimal {
                Decimal(&self.0 $op &rhs.0)
            }
        }
        impl<'a> $tr<&'a Decimal> for Decimal {
            type Output = Decimal;
            fn $method(self, rhs: &'a Decimal) -> Decimal {
                Decimal(self.0 $op &rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl AddAssign<&Decimal> for Decimal {
    fn add_assign(&mut self, rhs: &Decimal) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Decimal> for Decimal {
    fn sub_assign(&mut self, rhs: &Decimal) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Decimal {
    type Output = Decimal;
    fn neg(self) -> Decimal {
        Decimal(-self.0)
    }
}

impl Sum for Decimal {
    fn sum<I: Iterator<Item = Decimal>>(iter: I) -> Self {
        iter.fold(Decimal::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Decimal> for Decimal {
    fn sum<I: Iterator<Item = &'a Decimal>>(iter: I) -> Self {
        let mut acc = Decimal::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
