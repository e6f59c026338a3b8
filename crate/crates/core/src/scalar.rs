//! Scalar values that are either exact rationals or floats.
//!
//! Condition checking is sharp: boundary points (e.g. `lambda = n - k/r`
//! exactly) must not be misclassified by rounding. Whenever every input of a
//! computation is rational, the whole computation stays in exact rational
//! arithmetic; a single float input demotes the result to float.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Exact rational backing type. `i128` components keep products of the
/// handful of factors appearing in any condition check far from overflow.
pub type Rational = Ratio<i128>;

/// A number carried either exactly or as an `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Float(f64),
}

impl Scalar {
    pub fn from_int(n: i128) -> Self {
        Scalar::Exact(Rational::from_integer(n))
    }

    pub fn ratio(num: i128, den: i128) -> Self {
        Scalar::Exact(Rational::new(num, den))
    }

    pub fn zero() -> Self {
        Scalar::from_int(0)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(x) => *x,
        }
    }

    /// Exact value if this scalar is exact.
    pub fn as_exact(&self) -> Option<Rational> {
        match self {
            Scalar::Exact(r) => Some(*r),
            Scalar::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(x) => *x == 0.0,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(x) => Scalar::Float(x.abs()),
        }
    }

    pub fn recip(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.recip()),
            Scalar::Float(x) => Scalar::Float(1.0 / x),
        }
    }

    /// Parse `"a/b"`, an integer, or a decimal literal.
    ///
    /// Fractions and plain integers become exact rationals; anything with a
    /// decimal point or exponent is treated as a float, which downstream
    /// reports mark as float-mode.
    pub fn parse(s: &str) -> Result<Scalar, Error> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i128 = num
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
            let den: i128 = den
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
            if den == 0 {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(Scalar::Exact(Rational::new(num, den)));
        }
        if let Ok(n) = s.parse::<i128>() {
            return Ok(Scalar::from_int(n));
        }
        s.parse::<f64>()
            .map(Scalar::Float)
            .map_err(|_| Error::Parse(format!("cannot parse scalar {s:?}")))
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Float(x)
    }
}

impl From<i128> for Scalar {
    fn from(n: i128) -> Self {
        Scalar::from_int(n)
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Exact(r)
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.$method(b)),
                    (a, b) => Scalar::Float(a.to_f64().$method(b.to_f64())),
                }
            }
        }
    };
}

scalar_binop!(Add, add);
scalar_binop!(Sub, sub);
scalar_binop!(Mul, mul);
scalar_binop!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.partial_cmp(b),
            (a, b) => a.to_f64().partial_cmp(&b.to_f64()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if r.denom() == &1 {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(_) => ser.serialize_str(&self.to_string()),
            Scalar::Float(x) => ser.serialize_f64(*x),
        }
    }
}

struct ScalarVisitor;

impl<'de> Visitor<'de> for ScalarVisitor {
    type Value = Scalar;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or an \"a/b\" rational string")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
        Ok(Scalar::Float(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
        Ok(Scalar::from_int(v as i128))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
        Ok(Scalar::from_int(v as i128))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
        Scalar::parse(v).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Scalar, D::Error> {
        de.deserialize_any(ScalarVisitor)
    }
}

/// Conjugate exponent `e / (e - 1)`.
///
/// Involutive on `(1, inf)`; rejects `e <= 1`.
pub fn conjugate(e: Scalar) -> Result<Scalar, Error> {
    if e <= Scalar::from_int(1) {
        return Err(Error::Domain(format!(
            "conjugate exponent requires e > 1, got {e}"
        )));
    }
    Ok(e / (e - Scalar::from_int(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(Scalar::parse("6/5").unwrap(), Scalar::ratio(6, 5));
        assert_eq!(Scalar::parse("3").unwrap(), Scalar::from_int(3));
        assert_eq!(Scalar::parse("-7/2").unwrap(), Scalar::ratio(-7, 2));
        assert_eq!(Scalar::parse("1.25").unwrap(), Scalar::Float(1.25));
        assert!(Scalar::parse("1/0").is_err());
        assert!(Scalar::parse("x").is_err());
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate(Scalar::from_int(3)).unwrap(), Scalar::ratio(3, 2));
        assert_eq!(conjugate(Scalar::from_int(2)).unwrap(), Scalar::from_int(2));
        assert_eq!(conjugate(Scalar::ratio(6, 5)).unwrap(), Scalar::from_int(6));
        assert!(conjugate(Scalar::from_int(1)).is_err());
        assert!(conjugate(Scalar::Float(0.9)).is_err());
    }

    #[test]
    fn mixed_arithmetic_demotes_to_float() {
        let x = Scalar::ratio(1, 2) + Scalar::Float(0.25);
        assert!(!x.is_exact());
        assert_eq!(x.to_f64(), 0.75);
    }

    #[test]
    fn display_round_trip() {
        for s in ["5/6", "-3/4", "7", "0"] {
            let v = Scalar::parse(s).unwrap();
            assert_eq!(v.to_string(), s);
            assert_eq!(Scalar::parse(&v.to_string()).unwrap(), v);
        }
    }
}
