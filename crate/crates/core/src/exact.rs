//! Exact rational scalars and their JSON representation.
//!
//! Combinatorial quantities (masses, boundaries, occupations) are kept in
//! arbitrary-precision rationals so conservation identities hold with zero
//! tolerance. JSON files accept numbers either as decimal literals, parsed
//! exactly (`0.25` means 1/4, not the nearest double), or as fraction
//! strings `"p/q"`. On output a rational is written as an integer when it
//! is one, as a decimal when its denominator divides a small power of ten,
//! and as `"p/q"` otherwise, so files round-trip losslessly.

use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

pub type Rat = num::BigRational;

/// Exact conversion; every finite double is a dyadic rational.
pub fn rat_from_f64(x: f64) -> crate::Result<Rat> {
    Rat::from_float(x).ok_or_else(|| Error::Parse(format!("nonfinite number {x}")))
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parse a JSON-style decimal literal (`-12`, `0.25`, `3e-4`) exactly.
pub fn parse_decimal(text: &str) -> crate::Result<Rat> {
    let bad = || Error::Parse(format!("invalid number literal {text:?}"));
    let mut rest = text.trim();
    let mut negative = false;
    if let Some(stripped) = rest.strip_prefix('-') {
        negative = true;
        rest = stripped;
    } else if let Some(stripped) = rest.strip_prefix('+') {
        rest = stripped;
    }

    let (mantissa_text, exp_text) = match rest.find(['e', 'E']) {
        Some(pos) => (&rest[..pos], Some(&rest[pos + 1..])),
        None => (rest, None),
    };
    let (int_text, frac_text) = match mantissa_text.find('.') {
        Some(pos) => (&mantissa_text[..pos], &mantissa_text[pos + 1..]),
        None => (mantissa_text, ""),
    };
    if int_text.is_empty() && frac_text.is_empty() {
        return Err(bad());
    }
    if !int_text.chars().all(|c| c.is_ascii_digit())
        || !frac_text.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }

    let digits = format!("{int_text}{frac_text}");
    let mut mantissa: BigInt = digits.parse().map_err(|_| bad())?;
    if negative {
        mantissa = -mantissa;
    }
    let mut scale: i64 = -(frac_text.len() as i64);
    if let Some(exp_text) = exp_text {
        let exp: i64 = exp_text.parse().map_err(|_| bad())?;
        scale += exp;
    }

    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rat::from_integer(mantissa * ten.pow(scale as u32))
    } else {
        Rat::new(mantissa, ten.pow((-scale) as u32))
    };
    Ok(value)
}

/// Parse either a fraction string `"p/q"` or a decimal literal.
pub fn parse_exact_str(text: &str) -> crate::Result<Rat> {
    if let Some((num_text, den_text)) = text.split_once('/') {
        let n: BigInt = num_text
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("invalid fraction {text:?}")))?;
        let d: BigInt = den_text
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("invalid fraction {text:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        Ok(Rat::new(n, d))
    } else {
        parse_decimal(text)
    }
}

/// Smallest `k` with `denom | 10^k`, if one exists below the cap.
fn decimal_scale(denom: &BigInt, cap: u32) -> Option<u32> {
    let mut d = denom.abs();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if d.is_one() {
        let k = twos.max(fives);
        (k <= cap).then_some(k)
    } else {
        None
    }
}

/// Canonical textual form plus a flag telling whether the text is a plain
/// JSON number (integer or finite decimal) or must be quoted as `"p/q"`.
pub fn canonical_text(x: &Rat) -> (String, bool) {
    if x.denom().is_one() {
        return (x.numer().to_string(), true);
    }
    if let Some(k) = decimal_scale(x.denom(), 18) {
        let ten = BigInt::from(10);
        let scaled = x.numer() * ten.pow(k) / x.denom();
        let digits = scaled.abs().to_string();
        let sign = if scaled.is_negative() { "-" } else { "" };
        let k = k as usize;
        let text = if digits.len() > k {
            let (int_part, frac_part) = digits.split_at(digits.len() - k);
            format!("{sign}{int_part}.{frac_part}")
        } else {
            format!("{sign}0.{digits:0>width$}", width = k)
        };
        (text, true)
    } else {
        (format!("{}/{}", x.numer(), x.denom()), false)
    }
}

pub fn rat_to_json(x: &Rat) -> serde_json::Value {
    let (text, numeric) = canonical_text(x);
    if numeric {
        // canonical_text only flags syntactically valid JSON numbers
        serde_json::Value::Number(serde_json::Number::from_string_unchecked(text))
    } else {
        serde_json::Value::String(text)
    }
}

pub fn rat_from_json(value: &serde_json::Value) -> crate::Result<Rat> {
    match value {
        serde_json::Value::Number(n) => parse_decimal(&n.to_string()),
        serde_json::Value::String(s) => parse_exact_str(s),
        other => Err(Error::Parse(format!("expected number or \"p/q\", got {other}"))),
    }
}

/// Serde wrapper for exact scalars inside instance, flow, and plan files.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExactNum(pub Rat);

impl From<Rat> for ExactNum {
    fn from(value: Rat) -> Self {
        ExactNum(value)
    }
}

impl Serialize for ExactNum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        rat_to_json(&self.0).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExactNum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        rat_from_json(&value)
            .map(ExactNum)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}
