//! Extended reals `[-inf, +inf]` with a total order and checked arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A value in `[-inf, +inf]`.
///
/// `Finite` never holds a NaN or an IEEE infinity; the constructors route
/// those to the dedicated variants (or reject NaN).
#[derive(Clone, Copy, Debug)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

use ExtReal::*;

impl ExtReal {
    pub const ZERO: ExtReal = Finite(0.0);

    /// Maps IEEE infinities to the infinite variants. Panics on NaN.
    pub fn from_f64(v: f64) -> Self {
        Self::try_from_f64(v).expect("NaN is not an extended real")
    }

    pub fn try_from_f64(v: f64) -> Result<Self> {
        if v.is_nan() {
            Err(Error::Domain("NaN is not an extended real".into()))
        } else if v == f64::INFINITY {
            Ok(PosInf)
        } else if v == f64::NEG_INFINITY {
            Ok(NegInf)
        } else {
            Ok(Finite(v))
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            NegInf => f64::NEG_INFINITY,
            Finite(v) => v,
            PosInf => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        matches!(self, PosInf)
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, NegInf)
    }

    /// Sum; `+inf + -inf` is a domain error.
    pub fn checked_add(self, other: ExtReal) -> Result<ExtReal> {
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => {
                Err(Error::Domain("+inf + -inf is undefined".into()))
            }
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (Finite(a), Finite(b)) => Self::try_from_f64(a + b),
        }
    }

    pub fn checked_sub(self, other: ExtReal) -> Result<ExtReal> {
        self.checked_add(-other)
    }

    /// Product with a real scalar. `0 * inf` is taken as 0 (the convention
    /// used for positively homogeneous functions).
    pub fn scale(self, s: f64) -> ExtReal {
        match self {
            Finite(v) => ExtReal::from_f64(v * s),
            _ if s == 0.0 => Finite(0.0),
            PosInf if s > 0.0 => PosInf,
            PosInf => NegInf,
            NegInf if s > 0.0 => NegInf,
            NegInf => PosInf,
        }
    }

    /// Difference quotient `(self - base) / t` for `t > 0`, with `base` finite.
    pub fn quotient(self, base: f64, t: f64) -> ExtReal {
        match self {
            Finite(v) => ExtReal::from_f64((v - base) / t),
            other => other,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `self <= other + tol` on the extended line. Infinite values compare
    /// only through the order; the tolerance applies to finite pairs.
    pub fn le_within(self, other: ExtReal, tol: f64) -> bool {
        match (self, other) {
            (Finite(a), Finite(b)) => a <= b + tol,
            _ => self <= other,
        }
    }

    /// Equal within `tol` for finite pairs, identical class otherwise.
    pub fn close_to(self, other: ExtReal, tol: f64) -> bool {
        match (self, other) {
            (Finite(a), Finite(b)) => (a - b).abs() <= tol,
            (PosInf, PosInf) | (NegInf, NegInf) => true,
            _ => false,
        }
    }

    fn rank(self) -> u8 {
        match self {
            NegInf => 0,
            Finite(_) => 1,
            PosInf => 2,
        }
    }
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Finite(a), Finite(b)) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl std::ops::Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        match self {
            NegInf => PosInf,
            Finite(v) => Finite(-v),
            PosInf => NegInf,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => f.write_str("-inf"),
            PosInf => f.write_str("+inf"),
            Finite(v) => write!(f, "{}", v),
        }
    }
}

impl FromStr for ExtReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "Infinity" | "+Infinity" => Ok(PosInf),
            "-inf" | "-Infinity" => Ok(NegInf),
            other => other
                .parse::<f64>()
                .map_err(|e| Error::Domain(format!("bad extended real {:?}: {}", other, e)))
                .and_then(ExtReal::try_from_f64),
        }
    }
}

// Finite values serialize as JSON numbers, infinities as "+inf" / "-inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Finite(v) => serializer.serialize_f64(*v),
            PosInf => serializer.serialize_str("+inf"),
            NegInf => serializer.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => ExtReal::try_from_f64(v).map_err(serde::de::Error::custom),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
