//! Exact half-integer angular momentum quantum numbers.
//!
//! Atomic angular momenta (J, I, F) take integer or half-odd-integer values.
//! Storing them as `f64` invites equality bugs (`0.1 + 0.2` style) in the
//! selection-rule and coupling-range logic, so [`HalfInt`] stores *twice* the
//! value as an integer and only converts to `f64` at the numerical boundary.

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// A non-negative integer or half-odd-integer quantum number (0, 1/2, 1,
/// 3/2, ...), stored exactly as twice its value.
///
/// Ordering, equality and hashing are exact. Arithmetic that stays in the
/// half-integer lattice (`+`, checked subtraction, absolute difference) is
/// provided; anything else goes through [`HalfInt::value`].
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt {
    twice: u32,
}

impl HalfInt {
    /// Zero angular momentum.
    pub const ZERO: HalfInt = HalfInt { twice: 0 };

    /// Builds from twice the value, so `from_twice(7)` is 7/2.
    pub const fn from_twice(twice: u32) -> Self {
        HalfInt { twice }
    }

    /// Builds from an integer value, so `from_int(3)` is 3.
    pub const fn from_int(n: u32) -> Self {
        HalfInt { twice: 2 * n }
    }

    /// Twice the stored value (always exact).
    pub const fn twice(self) -> u32 {
        self.twice
    }

    /// The value as `f64` (exact: twice fits well below 2^53).
    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    /// True when the value is a whole integer.
    pub const fn is_integer(self) -> bool {
        self.twice.is_multiple_of(2)
    }

    /// Number of magnetic sublevels, 2x + 1.
    pub const fn multiplicity(self) -> u32 {
        self.twice + 1
    }

    /// |self - other|, exact.
    pub const fn abs_diff(self, other: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice.abs_diff(other.twice),
        }
    }

    /// `self - other` when non-negative, else `None`.
    pub const fn checked_sub(self, other: HalfInt) -> Option<HalfInt> {
        match self.twice.checked_sub(other.twice) {
            Some(t) => Some(HalfInt { twice: t }),
            None => None,
        }
    }

    /// Signed difference `self - other` in units of 1/2 (i.e. twice the
    /// value difference). Handy for selection rules: |ΔF| <= 1 is
    /// `signed_twice_diff(..).abs() <= 2`.
    pub const fn signed_twice_diff(self, other: HalfInt) -> i64 {
        self.twice as i64 - other.twice as i64
    }

    /// All values F allowed when coupling `a` and `b`:
    /// |a - b|, |a - b| + 1, ..., a + b.
    pub fn coupling_range(a: HalfInt, b: HalfInt) -> impl Iterator<Item = HalfInt> {
        let lo = a.abs_diff(b).twice;
        let hi = a.twice + b.twice;
        (lo..=hi).step_by(2).map(HalfInt::from_twice)
    }

    /// True when `self` lies in the coupling range of `a` and `b`. The
    /// three values must also close a triangle with matching lattice
    /// parity: their sum must be an integer, which the step-2 check covers.
    pub fn in_coupling_range(self, a: HalfInt, b: HalfInt) -> bool {
        let lo = a.abs_diff(b).twice;
        let hi = a.twice + b.twice;
        self.twice >= lo && self.twice <= hi && (self.twice + lo).is_multiple_of(2)
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice + rhs.twice,
        }
    }
}

impl From<u32> for HalfInt {
    fn from(n: u32) -> Self {
        HalfInt::from_int(n)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Error produced when parsing a [`HalfInt`] from text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseHalfIntError(String);

impl fmt::Display for ParseHalfIntError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "'{}' is not a half-integer (expected e.g. \"3\", \"7/2\" or \"3.5\")",
            self.0
        )
    }
}

impl std::error::Error for ParseHalfIntError {}

impl FromStr for HalfInt {
    type Err = ParseHalfIntError;

    /// Accepts `"3"`, `"7/2"` and the decimal forms `"3.5"` / `"3.0"`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        let err = || ParseHalfIntError(s.to_owned());
        if let Some((num, den)) = s.split_once('/') {
            if den.trim() != "2" {
                return Err(err());
            }
            let twice: u32 = num.trim().parse().map_err(|_| err())?;
            if twice.is_multiple_of(2) {
                // "6/2" is written "3"; rejecting it catches typos early.
                return Err(err());
            }
            Ok(HalfInt::from_twice(twice))
        } else if let Some((int, frac)) = s.split_once('.') {
            let whole: u32 = int.parse().map_err(|_| err())?;
            match frac {
                "0" => Ok(HalfInt::from_int(whole)),
                "5" => Ok(HalfInt::from_twice(2 * whole + 1)),
                _ => Err(err()),
            }
        } else {
            let whole: u32 = s.parse().map_err(|_| err())?;
            Ok(HalfInt::from_int(whole))
        }
    }
}

impl Serialize for HalfInt {
    /// Serializes as the human-readable string form (`"6"`, `"13/2"`), which
    /// keeps JSON output legible and round-trips exactly.
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}
