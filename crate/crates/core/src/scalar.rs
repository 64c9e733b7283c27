//! Scalar abstraction and the extended reals used for bonus parameters.

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("representable constant")
    }

    fn of_u64(n: u64) -> Self {
        Self::from_u64(n).expect("representable count")
    }

    /// Positive part `(x)_+`.
    fn pos(self) -> Self {
        if self > Self::zero() {
            self
        } else {
            Self::zero()
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A nonnegative real or the distinguished value `+inf`.
///
/// `min` treats `Infinite` as absorbing: `min(x, inf) = x`. Dividing by an
/// infinite value is never needed and is not provided.
#[derive(Clone, Copy, PartialEq)]
pub enum ExtReal<T = f64> {
    Finite(T),
    Infinite,
}

impl<T: Real> ExtReal<T> {
    pub fn finite(x: T) -> Self {
        ExtReal::Finite(x)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinite)
    }

    pub fn as_finite(&self) -> Option<T> {
        match *self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinite => None,
        }
    }

    /// Lossy view as a float, with `Infinite` mapped to `T::infinity()`.
    pub fn to_float(self) -> T {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::Infinite => T::infinity(),
        }
    }

    pub fn min(self, other: Self) -> Self {
        match (self, other) {
            (ExtReal::Infinite, o) => o,
            (s, ExtReal::Infinite) => s,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(if b < a { b } else { a }),
        }
    }

    pub fn max(self, other: Self) -> Self {
        match (self, other) {
            (ExtReal::Infinite, _) | (_, ExtReal::Infinite) => ExtReal::Infinite,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(if b > a { b } else { a }),
        }
    }

    /// Multiplication by a strictly positive finite factor.
    pub fn scale(self, factor: T) -> Self {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x * factor),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }

    /// Strict comparison against a finite threshold; `inf < t` is false.
    pub fn lt(self, threshold: T) -> bool {
        match self {
            ExtReal::Finite(x) => x < threshold,
            ExtReal::Infinite => false,
        }
    }
}

impl<T: Real> std::ops::Add for ExtReal<T> {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

impl<T: Real> PartialOrd for ExtReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
            (ExtReal::Infinite, _) => Some(Ordering::Greater),
            (_, ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl<T: Real> From<T> for ExtReal<T> {
    fn from(x: T) -> Self {
        if x.is_infinite() && x > T::zero() {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(x)
        }
    }
}

impl<T: Real> Debug for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x:?}"),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

impl<T: Real> Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

// JSON has no infinity; the string "inf" stands in for it.
impl Serialize for ExtReal<f64> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal<f64> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(ExtReal::Finite(x)),
            Repr::Str(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(ExtReal::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected number or \"inf\", got {s:?}"
            ))),
        }
    }
}
