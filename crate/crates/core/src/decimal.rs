//! Fixed-point decimals with one fractional digit, stored as tenths.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Sub};
use std::str::FromStr;

use crate::error::Error;

/// A non-float decimal with exactly one fractional digit (`3.1` is
/// `Tenths(31)`). Weights, values and budgets use it so that sums and
/// comparisons are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Tenths(pub i64);

impl Tenths {
    pub const ZERO: Tenths = Tenths(0);

    pub fn checked_add(self, rhs: Tenths) -> Option<Tenths> {
        self.0.checked_add(rhs.0).map(Tenths)
    }
}

impl FromStr for Tenths {
    type Err = Error;

    /// Accepts `12`, `-3`, `3.1`, `7.0`. Rejects exponents and more than one
    /// fractional digit instead of rounding.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::domain(format!("'{s}' is not a decimal with at most one fractional digit"));
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let frac_digit = match frac {
            None => 0,
            Some(f) if f.len() == 1 && f.as_bytes()[0].is_ascii_digit() => (f.as_bytes()[0] - b'0') as i64,
            Some(_) => return Err(bad()),
        };
        let whole: i64 = int.parse().map_err(|_| bad())?;
        let v = whole
            .checked_mul(10)
            .and_then(|x| x.checked_add(frac_digit))
            .ok_or_else(bad)?;
        Ok(Tenths(if neg { -v } else { v }))
    }
}

impl fmt::Display for Tenths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        write!(f, "{sign}{}.{}", a / 10, a % 10)
    }
}

impl Add for Tenths {
    type Output = Tenths;
    fn add(self, rhs: Tenths) -> Tenths {
        Tenths(self.0 + rhs.0)
    }
}

impl Sub for Tenths {
    type Output = Tenths;
    fn sub(self, rhs: Tenths) -> Tenths {
        Tenths(self.0 - rhs.0)
    }
}

impl Sum for Tenths {
    fn sum<I: Iterator<Item = Tenths>>(iter: I) -> Tenths {
        iter.fold(Tenths::ZERO, |a, b| a + b)
    }
}
