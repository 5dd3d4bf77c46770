//! Exact rational helpers shared by the matrix and condition code.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, TodaError};

pub type Rational = BigRational;

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact binary value of a finite float.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| TodaError::InvalidInput(format!("non-finite number {x}")))
}

/// Always `p/q`, also for integers, so consumers can split on `/`.
pub fn format_pq(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Accepts `p/q`, a plain integer, or a decimal literal such as `0.125`
/// (read exactly, not through binary floating point).
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || TodaError::InvalidInput(format!("not a rational number: `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(TodaError::InvalidInput(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let joined: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    let ten = BigInt::from(10);
    let scale = exponent - frac.len() as i32;
    let mut value = Rational::from_integer(joined);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// A JSON-facing rational: deserializes from a string (`"1/3"`, `"0.25"`) or a
/// number, serializes as `"p/q"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalValue(pub Rational);

impl fmt::Display for RationalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_pq(&self.0))
    }
}

impl Serialize for RationalValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RationalValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let q = match Raw::deserialize(deserializer)? {
            Raw::Int(n) => Ok(int(n)),
            Raw::Float(x) => from_f64(x),
            Raw::Text(s) => parse_rational(&s),
        };
        q.map(RationalValue).map_err(serde::de::Error::custom)
    }
}

/// Dense exact matrix product of two square row-major matrices.
pub fn matmul(lhs: &[Vec<Rational>], rhs: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let inner = rhs.len();
    let cols = rhs.first().map_or(0, Vec::len);
    lhs.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(Rational::zero(), |acc, k| acc + &row[k] * &rhs[k][j]))
                .collect()
        })
        .collect()
}

pub fn is_identity(m: &[Vec<Rational>]) -> bool {
    m.iter().enumerate().all(|(i, row)| {
        row.len() == m.len()
            && row
                .iter()
                .enumerate()
                .all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })
    })
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}
