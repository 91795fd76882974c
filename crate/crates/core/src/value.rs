//! Exact reward arithmetic.
//!
//! Every reward, penalty and objective value is an exact rational so that
//! pruned and unpruned searches can be compared for strict equality.

use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational reward value.
pub type Value = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational value {0:?} (expected an integer, a decimal or p/q)")]
pub struct ParseValueError(pub String);

/// Parses `7`, `-3`, `0.25` or `3/2` into an exact value.
pub fn parse_value(text: &str) -> Result<Value, ParseValueError> {
    let err = || ParseValueError(text.to_string());
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = i128::from_str(num.trim()).map_err(|_| err())?;
        let den = i128::from_str(den.trim()).map_err(|_| err())?;
        if den == 0 {
            return Err(err());
        }
        return Ok(Ratio::new(num, den));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 18 {
            return Err(err());
        }
        let negative = int.starts_with('-');
        let int_part = if int.is_empty() || int == "-" || int == "+" {
            0
        } else {
            i128::from_str(int).map_err(|_| err())?
        };
        let scale = 10i128.pow(frac.len() as u32);
        let frac_part = i128::from_str(frac).map_err(|_| err())?;
        let magnitude = int_part.abs() * scale + frac_part;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(Ratio::new(numer, scale));
    }
    i128::from_str(text).map(Ratio::from_integer).map_err(|_| err())
}

/// Canonical text form: `7`, `-3`, `3/2`.
pub fn format_value(v: &Value) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn to_f64(v: &Value) -> f64 {
    v.to_f64().unwrap_or_else(|| *v.numer() as f64 / *v.denom() as f64)
}

pub fn is_non_negative(v: &Value) -> bool {
    !v.is_negative()
}

pub fn zero() -> Value {
    Value::zero()
}

pub fn int(n: i64) -> Value {
    Value::from_integer(n as i128)
}

/// Serde adapter storing a [`Value`] as its canonical string.
pub mod serde_value {
    use super::{format_value, parse_value, Value};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Value, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_value(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Value, D::Error> {
        let text = String::deserialize(d)?;
        parse_value(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_value("7").unwrap(), int(7));
        assert_eq!(parse_value("-3").unwrap(), int(-3));
        assert_eq!(parse_value("3/2").unwrap(), Ratio::new(3, 2));
        assert_eq!(parse_value("0.25").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_value("-1.5").unwrap(), Ratio::new(-3, 2));
        assert_eq!(parse_value("-0.5").unwrap(), Ratio::new(-1, 2));
        assert!(parse_value("1/0").is_err());
        assert!(parse_value("abc").is_err());
        assert!(parse_value("1.").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_value(&int(-30)), "-30");
        assert_eq!(format_value(&Ratio::new(6, 4)), "3/2");
        assert_eq!(parse_value(&format_value(&Ratio::new(-7, 3))).unwrap(), Ratio::new(-7, 3));
    }
}
