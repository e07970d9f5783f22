//! Extended reals `[-inf, +inf]` with Moreau's lower and upper additions.
//!
//! Ordinary IEEE arithmetic leaves `(+inf) + (-inf)` undefined (NaN). When
//! conjugates are built from suprema and infima of sums that may mix both
//! infinities, that case has to be resolved one way or the other:
//!
//! * the **lower** addition [`XReal::low_add`] sends it to `-inf` and is the
//!   one used inside suprema;
//! * the **upper** addition [`XReal::upp_add`] sends it to `+inf` and is the
//!   one used inside infima.
//!
//! Both agree with ordinary addition everywhere else. Comparison is the exact
//! total order `-inf < a < +inf`; no tolerance is applied here.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum XRealError {
    #[error("NaN is not an extended real")]
    NotANumber,
}

/// An element of `[-inf, +inf]`.
#[derive(Debug, Clone, Copy)]
pub enum XReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl XReal {
    pub const ZERO: XReal = XReal::Finite(0.0);

    /// Builds an extended real from a double. IEEE infinities map to the
    /// infinite variants; NaN is rejected.
    pub fn new(v: f64) -> Result<Self, XRealError> {
        if v.is_nan() {
            Err(XRealError::NotANumber)
        } else if v == f64::INFINITY {
            Ok(XReal::PosInf)
        } else if v == f64::NEG_INFINITY {
            Ok(XReal::NegInf)
        } else {
            Ok(XReal::Finite(v))
        }
    }

    /// Like [`XReal::new`] but panics on NaN. Meant for values that are
    /// finite by construction (norms, dot products of validated vectors).
    pub fn from_f64(v: f64) -> Self {
        Self::new(v).expect("NaN passed where a number was required")
    }

    pub fn is_finite(self) -> bool {
        matches!(self, XReal::Finite(_))
    }

    /// IEEE view: infinities become `f64::INFINITY` / `f64::NEG_INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            XReal::NegInf => f64::NEG_INFINITY,
            XReal::Finite(a) => a,
            XReal::PosInf => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            XReal::Finite(a) => Some(a),
            _ => None,
        }
    }

    /// Moreau lower addition: `(+inf) + (-inf) = -inf`.
    pub fn low_add(self, other: XReal) -> XReal {
        match (self, other) {
            (XReal::NegInf, _) | (_, XReal::NegInf) => XReal::NegInf,
            (XReal::PosInf, _) | (_, XReal::PosInf) => XReal::PosInf,
            (XReal::Finite(a), XReal::Finite(b)) => XReal::from_finite_sum(a + b),
        }
    }

    /// Moreau upper addition: `(+inf) + (-inf) = +inf`.
    pub fn upp_add(self, other: XReal) -> XReal {
        match (self, other) {
            (XReal::PosInf, _) | (_, XReal::PosInf) => XReal::PosInf,
            (XReal::NegInf, _) | (_, XReal::NegInf) => XReal::NegInf,
            (XReal::Finite(a), XReal::Finite(b)) => XReal::from_finite_sum(a + b),
        }
    }

    #[allow(clippy::should_implement_trait)] // also implemented as `Neg`, kept for method chains
    pub fn neg(self) -> XReal {
        match self {
            XReal::NegInf => XReal::PosInf,
            XReal::Finite(a) => XReal::Finite(-a),
            XReal::PosInf => XReal::NegInf,
        }
    }

    // Overflow of two finite doubles lands on an IEEE infinity, which is the
    // right extended-real answer.
    fn from_finite_sum(s: f64) -> XReal {
        XReal::new(s).expect("sum of two finite doubles is never NaN")
    }

    pub fn max(self, other: XReal) -> XReal {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: XReal) -> XReal {
        if other < self {
            other
        } else {
            self
        }
    }

    fn rank(self) -> u8 {
        match self {
            XReal::NegInf => 0,
            XReal::Finite(_) => 1,
            XReal::PosInf => 2,
        }
    }
}

/// Supremum of a finite family, with `sup {} = -inf`.
pub fn sup_fold<I: IntoIterator<Item = XReal>>(values: I) -> XReal {
    values.into_iter().fold(XReal::NegInf, XReal::max)
}

/// Infimum of a finite family, with `inf {} = +inf`.
pub fn inf_fold<I: IntoIterator<Item = XReal>>(values: I) -> XReal {
    values.into_iter().fold(XReal::PosInf, XReal::min)
}

impl PartialEq for XReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for XReal {}

impl PartialOrd for XReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for XReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (XReal::Finite(a), XReal::Finite(b)) => {
                // -0.0 and 0.0 compare equal; NaN cannot occur.
                a.partial_cmp(b).expect("XReal never holds NaN")
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl std::ops::Neg for XReal {
    type Output = XReal;
    fn neg(self) -> XReal {
        XReal::neg(self)
    }
}

impl From<i32> for XReal {
    fn from(v: i32) -> Self {
        XReal::Finite(f64::from(v))
    }
}

impl fmt::Display for XReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XReal::NegInf => f.write_str("-inf"),
            XReal::Finite(a) => write!(f, "{a}"),
            XReal::PosInf => f.write_str("+inf"),
        }
    }
}

// JSON: finite values as numbers, infinities as the strings "+inf" / "-inf".
impl Serialize for XReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            XReal::NegInf => serializer.serialize_str("-inf"),
            XReal::Finite(a) => serializer.serialize_f64(*a),
            XReal::PosInf => serializer.serialize_str("+inf"),
        }
    }
}

impl<'de> serde::Deserialize<'de> for XReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct XRealVisitor;

        impl Visitor<'_> for XRealVisitor {
            type Value = XReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"+inf\", \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<XReal, E> {
                XReal::new(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<XReal, E> {
                Ok(XReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<XReal, E> {
                Ok(XReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<XReal, E> {
                match v {
                    "+inf" => Ok(XReal::PosInf),
                    "-inf" => Ok(XReal::NegInf),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(XRealVisitor)
    }
}
