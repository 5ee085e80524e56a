use std::cmp::Ordering;
use std::fmt;

use crate::{Error, Result};

/// An exact dyadic rational `numerator / 2^level` in [0, 1].
///
/// Equality and ordering are integer-exact; conversion to floating point
/// happens only at the evaluation boundary (`value`), where it is lossless
/// because every representable numerator fits in the f64 mantissa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: u64,
    level: u32,
}

/// Levels above this would overflow exact f64 conversion.
const DYADIC_LEVEL_CAP: u32 = 52;

impl DyadicRational {
    pub fn new(numerator: u64, level: u32) -> Result<Self> {
        if level > DYADIC_LEVEL_CAP {
            return Err(Error::LevelOverflow {
                level,
                cap: DYADIC_LEVEL_CAP,
            });
        }
        if numerator > 1u64 << level {
            return Err(Error::OutOfDomain {
                value: numerator as f64 / (1u64 << level) as f64,
            });
        }
        Ok(Self { numerator, level })
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Exact f64 value `numerator / 2^level`.
    pub fn value(&self) -> f64 {
        self.numerator as f64 * (0.5f64).powi(self.level as i32)
    }

    /// Same rational with the smallest possible level.
    pub fn simplified(&self) -> Self {
        let mut num = self.numerator;
        let mut level = self.level;
        while level > 0 && num.is_multiple_of(2) {
            num /= 2;
            level -= 1;
        }
        Self {
            numerator: num,
            level,
        }
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        // Cross-multiply in u128: numerator <= 2^52 and shift <= 52.
        let lhs = (self.numerator as u128) << other.level;
        let rhs = (other.numerator as u128) << self.level;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.level)
    }
}
