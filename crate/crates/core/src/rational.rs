//! Exact rational numbers and their `"num/den"` text form.
//!
//! Every probability, LP coefficient and optimum in this crate is a
//! [`Rational`]. The wire format is always `num/den` with a positive
//! denominator, including integers (`"1/1"`, `"0/1"`), so that values are
//! unambiguous and byte-stable across runs.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse rational from {input:?}: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Canonical `num/den` form.
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den`, a bare integer, or a finite decimal such as `0.25`.
pub fn parse(s: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        input: s.to_string(),
        reason,
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(err("empty string"));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole: BigInt = match whole.trim() {
            "" | "-" | "+" => BigInt::zero(),
            w => w.parse().map_err(|_| err("bad integer part"))?,
        };
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(err("bad fractional part"));
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| err("bad fractional part"))?;
        let mag = Rational::from_integer(whole.abs()) + Rational::new(frac, scale);
        return Ok(if negative { -mag } else { mag });
    }
    let n: BigInt = t.parse().map_err(|_| err("not a number"))?;
    Ok(Rational::from_integer(n))
}

/// Decimal rendering rounded half away from zero to `digits` places, computed
/// in exact integer arithmetic.
pub fn decimal(r: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = r.abs() * Rational::from_integer(scale.clone());
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let rounded = if rem * BigInt::from(2) >= *scaled.denom() {
        q + BigInt::one()
    } else {
        q
    };
    let (ip, fp) = rounded.div_rem(&scale);
    let mut out = String::new();
    if r.is_negative() && !(ip.is_zero() && fp.is_zero()) {
        out.push('-');
    }
    write!(out, "{ip}").unwrap();
    if digits > 0 {
        write!(out, ".{:0>width$}", fp.to_string(), width = digits).unwrap();
    }
    out
}

/// Serde adapter storing a [`Rational`] as a `"num/den"` string.
pub mod serde_str {
    use super::Rational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(D::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod serde_vec {
    use super::Rational;
    use serde::{de::Error as _, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&super::format(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| super::parse(s).map_err(D::Error::custom))
            .collect()
    }
}
