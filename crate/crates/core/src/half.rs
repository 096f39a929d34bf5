//! Half-integer spin projections, stored as doubled integers so that
//! values like 9/2 stay exact.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// A half-integer (..., -1, -1/2, 0, 1/2, 1, ...). Serializes as the
/// human-readable string form ("9/2", "-3").
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt {
    doubled: i32,
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        HalfInt::parse(&text)
            .ok_or_else(|| serde::de::Error::custom(format!("not a half-integer: {text}")))
    }
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { doubled: 0 };
    pub const HALF: HalfInt = HalfInt { doubled: 1 };

    pub fn from_doubled(doubled: i32) -> Self {
        Self { doubled }
    }

    pub fn from_int(n: i32) -> Self {
        Self { doubled: 2 * n }
    }

    pub fn doubled(self) -> i32 {
        self.doubled
    }

    pub fn value(self) -> f64 {
        f64::from(self.doubled) / 2.0
    }

    /// True when the value is of the form k + 1/2.
    pub fn is_half_odd(self) -> bool {
        self.doubled.rem_euclid(2) == 1
    }

    pub fn abs(self) -> Self {
        Self {
            doubled: self.doubled.abs(),
        }
    }

    /// Parses "9/2", "-7/2", "1", "-3".
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            if den.trim() != "2" {
                return None;
            }
            num.trim().parse::<i32>().ok().map(Self::from_doubled)
        } else {
            s.parse::<i32>().ok().map(Self::from_int)
        }
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: Self) -> Self {
        Self {
            doubled: self.doubled + rhs.doubled,
        }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: Self) -> Self {
        Self {
            doubled: self.doubled - rhs.doubled,
        }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> Self {
        Self {
            doubled: -self.doubled,
        }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.doubled % 2 == 0 {
            write!(f, "{}", self.doubled / 2)
        } else {
            write!(f, "{}/2", self.doubled)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_display() {
        let i = HalfInt::from_doubled(9); // 9/2
        assert_eq!(i.value(), 4.5);
        assert!(i.is_half_odd());
        assert_eq!(format!("{}", i), "9/2");
        assert_eq!(format!("{}", HalfInt::from_int(-3)), "-3");
        assert_eq!(i + HalfInt::HALF, HalfInt::from_int(5));
        assert_eq!(-i, HalfInt::from_doubled(-9));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["9/2", "-7/2", "0", "4", "-5"] {
            let v = HalfInt::parse(s).unwrap();
            assert_eq!(format!("{}", v), s);
        }
        assert!(HalfInt::parse("3/4").is_none());
    }
}
