//! Exact half-integer quantum numbers.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A quantum number stored as twice its value, so `1/2` is `HalfInt(1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn int(n: i32) -> Self {
        HalfInt(2 * n)
    }

    /// Nearest half-integer to `x` (ties away from zero).
    pub fn round_from(x: f64) -> Self {
        HalfInt((2.0 * x).round() as i32)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// True when `self - other` is an integer.
    pub const fn same_parity(self, other: HalfInt) -> bool {
        (self.0 - other.0) % 2 == 0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// Integer value of `self`; panics if half-odd.
    pub fn to_int(self) -> i32 {
        assert!(self.is_integer(), "{self} is not an integer");
        self.0 / 2
    }

    /// The projections `-j, -j+1, …, j`.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        let j = self.0;
        (0..=j).map(move |t| HalfInt(2 * t - j))
    }

    /// `j(j+1)` as a float.
    pub fn casimir(self) -> f64 {
        let j = self.value();
        j * (j + 1.0)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 + o.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 - o.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl From<i32> for HalfInt {
    fn from(n: i32) -> Self {
        HalfInt::int(n)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl std::str::FromStr for HalfInt {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(num) = s.strip_suffix("/2") {
            let n: i32 = num.trim().parse().map_err(|_| format!("bad half-integer `{s}`"))?;
            return Ok(HalfInt(n));
        }
        if let Ok(n) = s.parse::<i32>() {
            return Ok(HalfInt::int(n));
        }
        let x: f64 = s.parse().map_err(|_| format!("bad half-integer `{s}`"))?;
        let h = HalfInt::round_from(x);
        if (h.value() - x).abs() > 1e-12 {
            return Err(format!("`{s}` is not a multiple of 1/2"));
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse_roundtrip() {
        for t in -7..=7 {
            let h = HalfInt::from_twice(t);
            assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h);
        }
        assert_eq!("2.5".parse::<HalfInt>().unwrap(), HalfInt::from_twice(5));
        assert!("0.3".parse::<HalfInt>().is_err());
    }

    #[test]
    fn projections_of_three_halves() {
        let m: Vec<i32> = HalfInt::from_twice(3).projections().map(|m| m.twice()).collect();
        assert_eq!(m, vec![-3, -1, 1, 3]);
    }
}
