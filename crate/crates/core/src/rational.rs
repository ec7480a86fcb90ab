//! Exact rational inputs.
//!
//! Phase durations must stay rational so that the step counts `n²τ` are exact
//! integers. Decimal strings are converted digit by digit (`"2.4"` becomes
//! `12/5`), never through a float.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Exact rational number used for α and the phase durations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i64>);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::Format("zero denominator".into()));
        }
        Ok(Self(Ratio::new(numer, denom)))
    }

    pub fn from_integer(value: i64) -> Self {
        Self(Ratio::from_integer(value))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.numer() > 0
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    /// `self * k`, or `None` on overflow.
    pub fn checked_mul_int(&self, k: i64) -> Option<Self> {
        let g = num_integer::gcd(k, self.denom());
        let numer = self.numer().checked_mul(k / g)?;
        Some(Self(Ratio::new(numer, self.denom() / g)))
    }

    /// Integer value when the number is integral.
    pub fn to_integer(&self) -> Option<i64> {
        self.is_integer().then(|| self.numer())
    }
}

impl std::ops::Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl std::ops::Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Format("empty rational".into()));
        }
        if let Some((num, den)) = s.split_once('/') {
            let num = parse_decimal(num)?;
            let den = parse_decimal(den)?;
            if den.numer() == 0 {
                return Err(Error::Format(format!("zero denominator in {s:?}")));
            }
            return Ok(Self(num.0 / den.0));
        }
        parse_decimal(s)
    }
}

impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Format(format!("not a rational number: {s:?}"));
    let s = s.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: i64 = digits.parse().map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let value = if scale >= 0 {
        let p = 10i64.checked_pow(scale as u32).ok_or_else(bad)?;
        Ratio::from_integer(numer.checked_mul(p).ok_or_else(bad)?)
    } else {
        Ratio::new(numer, 10i64.checked_pow((-scale) as u32).ok_or_else(bad)?)
    };
    Ok(Rational(value))
}
