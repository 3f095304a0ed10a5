//! Exact fractions in [0, 1] for percentile bounds and split ratios.
//!
//! Rank boundaries like ⌊q·n⌋ must be exact: binary floating point gets
//! `0.7 * 10` wrong, which would silently shift a percentile window by one
//! document. [`Quantile`] keeps the value as an exact rational parsed from
//! its decimal spelling, so window arithmetic and rank computation never
//! round.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// An exact fraction in [0, 1].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quantile(Ratio<u64>);

impl Quantile {
    pub const ZERO: Quantile = Quantile(Ratio::new_raw(0, 1));
    pub const ONE: Quantile = Quantile(Ratio::new_raw(1, 1));

    /// Exact fraction `numer / denom`; must lie in [0, 1].
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 || numer > denom {
            return Err(Error::InvalidQuantile(format!("{numer}/{denom}")));
        }
        Ok(Quantile(Ratio::new(numer, denom)))
    }

    pub fn is_zero(&self) -> bool {
        *self.0.numer() == 0
    }

    pub fn is_one(&self) -> bool {
        self.0.numer() == self.0.denom()
    }

    /// 1 − self.
    pub fn complement(&self) -> Quantile {
        Quantile(Ratio::from_integer(1) - self.0)
    }

    /// self / 2.
    pub fn halve(&self) -> Quantile {
        Quantile(self.0 / 2)
    }

    /// self + other; caller must keep the result within [0, 1].
    pub fn saturating_add(&self, other: Quantile) -> Quantile {
        let sum = self.0 + other.0;
        if sum > Ratio::from_integer(1) {
            Quantile::ONE
        } else {
            Quantile(sum)
        }
    }

    /// Exact difference self − other, or `None` when negative.
    pub fn checked_sub(&self, other: Quantile) -> Option<Quantile> {
        (self.0 >= other.0).then(|| Quantile(self.0 - other.0))
    }

    /// ⌊self · n⌋, exactly.
    pub fn rank_floor(&self, n: u64) -> u64 {
        let wide = u128::from(*self.0.numer()) * u128::from(n) / u128::from(*self.0.denom());
        wide as u64
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

/// Renders as an exact decimal when the reduced denominator divides a power
/// of ten (always the case for values parsed from decimal strings and their
/// halves), and as `numer/denom` otherwise.
impl fmt::Display for Quantile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let numer = *self.0.numer();
        let mut denom = *self.0.denom();
        if denom == 1 {
            return write!(f, "{numer}");
        }
        let (mut twos, mut fives) = (0u32, 0u32);
        while denom % 2 == 0 {
            denom /= 2;
            twos += 1;
        }
        while denom % 5 == 0 {
            denom /= 5;
            fives += 1;
        }
        if denom != 1 {
            return write!(f, "{}/{}", self.0.numer(), self.0.denom());
        }
        let digits = twos.max(fives);
        // Scale the numerator to `digits` decimal places.
        let scaled = u128::from(numer) * 10u128.pow(digits) / u128::from(*self.0.denom());
        let whole = scaled / 10u128.pow(digits);
        let frac = scaled % 10u128.pow(digits);
        let frac_str = format!("{frac:0width$}", width = digits as usize);
        let frac_str = frac_str.trim_end_matches('0');
        if frac_str.is_empty() {
            write!(f, "{whole}")
        } else {
            write!(f, "{whole}.{frac_str}")
        }
    }
}

impl fmt::Debug for Quantile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quantile({self})")
    }
}

impl FromStr for Quantile {
    type Err = Error;

    /// Accepts a decimal in [0, 1] (`"0.375"`, `".5"`, `"1"`) or an explicit
    /// fraction (`"3/8"`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidQuantile(s.to_string());
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let numer: u64 = n.trim().parse().map_err(|_| bad())?;
            let denom: u64 = d.trim().parse().map_err(|_| bad())?;
            return Quantile::new(numer, denom);
        }
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        if whole.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        if frac.len() > 12 {
            return Err(bad());
        }
        let whole_val: u64 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let scale = 10u64.pow(frac.len() as u32);
        let frac_val: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let numer = whole_val
            .checked_mul(scale)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(bad)?;
        Quantile::new(numer, scale)
    }
}

impl Serialize for Quantile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Quantile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
