//! Nonnegative extended reals, the value type of coverage.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// A value in `[0, +inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    pub fn new(value: f64) -> Self {
        if value.is_infinite() {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::Finite(value)
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtendedReal::Finite(v) if *v == 0.0)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(*v),
            ExtendedReal::Infinite => None,
        }
    }

    /// Comparison used when choosing between candidate explanations.
    ///
    /// Two infinite coverages cannot be ranked, so that case is an error.
    pub fn preference_cmp(&self, other: &Self) -> Result<Ordering> {
        match (self, other) {
            (ExtendedReal::Infinite, ExtendedReal::Infinite) => Err(Error::Principle2Violation(
                "two candidate rules both have infinite coverage".into(),
            )),
            _ => Ok(self.partial_cmp(other).unwrap_or(Ordering::Equal)),
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Finite(_), Infinite) => Some(Ordering::Less),
            (Infinite, Finite(_)) => Some(Ordering::Greater),
            (Infinite, Infinite) => Some(Ordering::Equal),
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::Infinite,
        }
    }
}

impl Mul for ExtendedReal {
    type Output = ExtendedReal;

    /// Measure-theoretic convention: `0 * inf = 0`.
    fn mul(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a * b),
            (ExtendedReal::Finite(a), ExtendedReal::Infinite) | (ExtendedReal::Infinite, ExtendedReal::Finite(a)) => {
                if a == 0.0 {
                    ExtendedReal::ZERO
                } else {
                    ExtendedReal::Infinite
                }
            }
            (ExtendedReal::Infinite, ExtendedReal::Infinite) => ExtendedReal::Infinite,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => serializer.serialize_f64(*v),
            ExtendedReal::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = deserializer.deserialize_any(BoundVisitor)?;
        if v < 0.0 {
            return Err(de::Error::custom("coverage must be nonnegative"));
        }
        Ok(ExtendedReal::new(v))
    }
}

/// Accepts a JSON number or one of the strings `inf`, `+inf`, `-inf`.
pub(crate) struct BoundVisitor;

impl Visitor<'_> for BoundVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a number or one of \"inf\", \"+inf\", \"-inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
        match v {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            other => Err(E::custom(format!("unknown bound `{other}`"))),
        }
    }
}

/// Serde adapter for possibly-infinite `f64` bounds.
pub(crate) mod bound {
    use super::BoundVisitor;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(BoundVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_dominates_finite() {
        assert!(ExtendedReal::Infinite > ExtendedReal::Finite(1e300));
        assert_eq!(
            ExtendedReal::Finite(2.0) * ExtendedReal::Finite(3.0),
            ExtendedReal::Finite(6.0)
        );
        assert_eq!(ExtendedReal::ZERO * ExtendedReal::Infinite, ExtendedReal::ZERO);
    }

    #[test]
    fn two_infinities_cannot_be_ranked() {
        let err = ExtendedReal::Infinite.preference_cmp(&ExtendedReal::Infinite);
        assert!(matches!(err, Err(Error::Principle2Violation(_))));
        assert_eq!(
            ExtendedReal::Finite(1.0)
                .preference_cmp(&ExtendedReal::Infinite)
                .unwrap(),
            Ordering::Less
        );
    }

    #[test]
    fn json_round_trip() {
        let s = serde_json::to_string(&[ExtendedReal::Finite(0.5), ExtendedReal::Infinite]).unwrap();
        assert_eq!(s, r#"[0.5,"inf"]"#);
        let back: Vec<ExtendedReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![ExtendedReal::Finite(0.5), ExtendedReal::Infinite]);
    }
}
