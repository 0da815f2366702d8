//! Closed real intervals and the interval order.
//!
//! An [`Interval`] `[lower; upper]` brackets an unknown point value. One
//! interval dominates another when its lower bound clears the other's upper
//! bound, so every point inside the first exceeds every point inside the
//! second. The resulting relation is an interval order: transitive, and
//! irreflexive in [`DominanceMode::Strict`].

use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    /// Builds `[lower; upper]`. Zero-width intervals are allowed.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() || upper < lower {
            return Err(Error::InvalidBounds { lower, upper });
        }
        Ok(Interval { lower, upper })
    }

    pub fn point(value: f64) -> Result<Self> {
        Interval::new(value, value)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_degenerate(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }

    /// True when `other` lies inside `self`.
    pub fn includes(&self, other: &Interval) -> bool {
        other.lower >= self.lower && other.upper <= self.upper
    }

    pub fn dominates(&self, other: &Interval, mode: DominanceMode) -> bool {
        match mode {
            DominanceMode::Strict => self.lower > other.upper,
            DominanceMode::Weak => self.lower >= other.upper,
        }
    }

    /// Replaces `self` with `new`, provided `new` lies inside `self`.
    pub fn contract(&self, new: Interval) -> Result<Interval> {
        if self.includes(&new) {
            Ok(new)
        } else {
            Err(Error::NotAContraction {
                old_lower: self.lower,
                old_upper: self.upper,
                new_lower: new.lower,
                new_upper: new.upper,
            })
        }
    }
}

/// Free-function form of [`Interval::dominates`].
pub fn interval_dominates(d1: &Interval, d2: &Interval, mode: DominanceMode) -> bool {
    d1.dominates(d2, mode)
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}; {}]", self.lower, self.upper)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lower, self.upper].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [lower, upper] = <[f64; 2]>::deserialize(deserializer)?;
        Interval::new(lower, upper).map_err(de::Error::custom)
    }
}

/// How ties between a lower and an upper bound are treated.
///
/// `Strict` requires `lower > upper` and keeps the relation irreflexive.
/// `Weak` accepts `lower >= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DominanceMode {
    #[default]
    Strict,
    Weak,
}

impl fmt::Display for DominanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DominanceMode::Strict => "strict",
            DominanceMode::Weak => "weak",
        })
    }
}

impl std::str::FromStr for DominanceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "strict" => Ok(DominanceMode::Strict),
            "weak" => Ok(DominanceMode::Weak),
            other => Err(format!("unknown dominance mode `{other}`")),
        }
    }
}
