//! Exact rational numbers and their wire encoding.
//!
//! Distances are never floating point. On the wire a rational is either a
//! JSON integer or a string `"p/q"` (also `"p"`), always read in lowest terms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::error::Error;

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `"p/q"`, `"p"` or a `-`-prefixed variant of either.
pub fn parse(text: &str) -> Result<Rational, Error> {
    let bad = || Error::Parse(format!("not a rational: {text:?}"));
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn from_json(value: &Value) -> Result<Rational, Error> {
    match value {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(int(i)),
            None => Err(Error::Parse(format!("non-integer JSON number {n}; use \"p/q\""))),
        },
        Value::String(s) => parse(s),
        other => Err(Error::Parse(format!("expected rational, found {other}"))),
    }
}

/// Integers become JSON numbers when they fit in `i64`, everything else a
/// `"p/q"` string in lowest terms.
pub fn to_json(value: &Rational) -> Value {
    if value.is_integer() {
        if let Ok(i) = i64::try_from(value.to_integer()) {
            return Value::from(i);
        }
    }
    Value::String(format(value))
}

pub fn format(value: &Rational) -> String {
    if value.is_integer() {
        value.to_integer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn is_positive(value: &Rational) -> bool {
    value.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse("-4").unwrap(), int(-4));
        assert_eq!(parse(" 7 / 2 ").unwrap(), frac(7, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn json_forms() {
        assert_eq!(to_json(&int(2)), Value::from(2));
        assert_eq!(to_json(&frac(6, 4)), Value::from("3/2"));
        assert_eq!(from_json(&Value::from("3/2")).unwrap(), frac(3, 2));
        assert_eq!(from_json(&Value::from(5)).unwrap(), int(5));
        assert!(from_json(&Value::from(0.5)).is_err());
    }
}
