//! Fixed-point decimal quantities.
//!
//! Prices and sizes are carried as integers scaled by 10^8 so that tick
//! binning never touches binary floating point.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of fractional decimal digits that are represented exactly.
pub const DECIMALS: u32 = 8;
/// `10^DECIMALS`.
pub const SCALE: i64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecimalError {
    #[error("empty decimal")]
    Empty,
    #[error("invalid decimal `{0}`")]
    Invalid(String),
    #[error("`{0}` has more than {DECIMALS} fractional digits")]
    TooPrecise(String),
    #[error("`{0}` is out of range")]
    Overflow(String),
}

/// Exact decimal with eight fractional digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Decimal(i64);

impl Decimal {
    pub const ZERO: Decimal = Decimal(0);

    pub const fn from_raw(raw: i64) -> Self {
        Decimal(raw)
    }

    /// Scaled integer representation (`value * 10^8`).
    pub const fn raw(self) -> i64 {
        self.0
    }

    pub const fn from_int(v: i64) -> Self {
        Decimal(v * SCALE)
    }

    /// Rounds an `f64` to the nearest representable decimal.
    pub fn from_f64_rounded(v: f64) -> Option<Self> {
        let scaled = (v * SCALE as f64).round();
        if scaled.is_finite() && scaled.abs() < i64::MAX as f64 {
            Some(Decimal(scaled as i64))
        } else {
            None
        }
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn checked_mul_int(self, k: i64) -> Option<Self> {
        self.0.checked_mul(k).map(Decimal)
    }

    pub fn abs(self) -> Self {
        Decimal(self.0.abs())
    }
}

impl Add for Decimal {
    type Output = Decimal;
    fn add(self, rhs: Decimal) -> Decimal {
        Decimal(self.0 + rhs.0)
    }
}

impl Sub for Decimal {
    type Output = Decimal;
    fn sub(self, rhs: Decimal) -> Decimal {
        Decimal(self.0 - rhs.0)
    }
}

impl Neg for Decimal {
    type Output = Decimal;
    fn neg(self) -> Decimal {
        Decimal(-self.0)
    }
}

impl FromStr for Decimal {
    type Err = DecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(DecimalError::Empty);
        }
        let (negative, body) = match s.as_bytes()[0] {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if int_part.is_empty() || !all_digits(int_part) || !all_digits(frac_part) {
            return Err(DecimalError::Invalid(s.to_string()));
        }
        if body.ends_with('.') {
            return Err(DecimalError::Invalid(s.to_string()));
        }
        if frac_part.len() > DECIMALS as usize {
            return Err(DecimalError::TooPrecise(s.to_string()));
        }
        let overflow = || DecimalError::Overflow(s.to_string());
        let mut raw: i64 = 0;
        for b in int_part.bytes() {
            raw = raw
                .checked_mul(10)
                .and_then(|r| r.checked_add((b - b'0') as i64))
                .ok_or_else(overflow)?;
        }
        let mut frac: i64 = 0;
        for b in frac_part.bytes() {
            frac = frac * 10 + (b - b'0') as i64;
        }
        frac *= 10_i64.pow(DECIMALS - frac_part.len() as u32);
        raw = raw
            .checked_mul(SCALE)
            .and_then(|r| r.checked_add(frac))
            .ok_or_else(overflow)?;
        Ok(Decimal(if negative { -raw } else { raw }))
    }
}

impl fmt::Display for Decimal {
    /// Canonical form: no trailing fractional zeros, no trailing point.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / SCALE as u64;
        let frac = abs % SCALE as u64;
        if frac == 0 {
            write!(f, "{sign}{int}")
        } else {
            let digits = format!("{:08}", frac);
            write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
        }
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

/// Exact rational price in scaled units, e.g. a window-averaged mid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactPrice(Ratio<i128>);

impl ExactPrice {
    /// `sum / count` where `sum` is in scaled units.
    pub fn from_scaled_ratio(sum: i128, count: i128) -> Self {
        ExactPrice(Ratio::new(sum, count))
    }

    pub fn from_decimal(d: Decimal) -> Self {
        ExactPrice(Ratio::from_integer(d.raw() as i128))
    }

    pub fn ratio(&self) -> Ratio<i128> {
        self.0
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        (*self.0.numer() as f64 / *self.0.denom() as f64) / SCALE as f64
    }

    pub fn abs(&self) -> Self {
        ExactPrice(if *self.0.numer() < 0 { -self.0 } else { self.0 })
    }

    /// Some(decimal) if the value is representable with eight digits.
    pub fn to_decimal(&self) -> Option<Decimal> {
        if self.0.is_integer() {
            i64::try_from(*self.0.numer()).ok().map(Decimal::from_raw)
        } else {
            None
        }
    }
}

impl Sub for ExactPrice {
    type Output = ExactPrice;
    fn sub(self, rhs: ExactPrice) -> ExactPrice {
        ExactPrice(self.0 - rhs.0)
    }
}

impl Add for ExactPrice {
    type Output = ExactPrice;
    fn add(self, rhs: ExactPrice) -> ExactPrice {
        ExactPrice(self.0 + rhs.0)
    }
}

impl fmt::Display for ExactPrice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_decimal() {
            Some(d) => write!(f, "{d}"),
            None => write!(f, "{}/{}", self.numer(), self.denom() * SCALE as i128),
        }
    }
}

impl FromStr for ExactPrice {
    type Err = DecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('/') {
            None => Ok(ExactPrice::from_decimal(s.parse()?)),
            Some((n, d)) => {
                let bad = || DecimalError::Invalid(s.to_string());
                let n: i128 = n.trim().parse().map_err(|_| bad())?;
                let d: i128 = d.trim().parse().map_err(|_| bad())?;
                if d <= 0 {
                    return Err(bad());
                }
                let n = n.checked_mul(SCALE as i128).ok_or_else(bad)?;
                Ok(ExactPrice(Ratio::new(n, d)))
            }
        }
    }
}

impl Serialize for ExactPrice {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactPrice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
