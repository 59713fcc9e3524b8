//! Homogeneity degrees and operator orders, restricted to multiples of 1/2.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};

/// A degree in `(1/2)·ℤ`, stored as twice its value so arithmetic stays exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Degree(i32);

impl Degree {
    pub const ZERO: Degree = Degree(0);

    pub const fn from_int(v: i32) -> Self {
        Degree(2 * v)
    }

    pub const fn from_halves(h: i32) -> Self {
        Degree(h)
    }

    pub fn try_from_f64(v: f64) -> Result<Self> {
        let twice = 2.0 * v;
        let rounded = twice.round();
        if !v.is_finite() || (twice - rounded).abs() > 1e-9 {
            return Err(Error::NotHalfInteger(v));
        }
        Ok(Degree(rounded as i32))
    }

    pub fn halves(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// The integer value, if this degree is an integer.
    pub fn as_int(self) -> Option<i32> {
        self.is_integer().then_some(self.0 / 2)
    }

    /// Number of whole steps from `lower` up to `self`, if they differ by a
    /// non-negative integer.
    pub fn steps_above(self, lower: Degree) -> Option<usize> {
        let diff = self.0 - lower.0;
        (diff >= 0 && diff % 2 == 0).then_some((diff / 2) as usize)
    }

    pub fn minus_steps(self, j: usize) -> Degree {
        Degree(self.0 - 2 * j as i32)
    }
}

impl Add for Degree {
    type Output = Degree;
    fn add(self, rhs: Degree) -> Degree {
        Degree(self.0 + rhs.0)
    }
}

impl Sub for Degree {
    type Output = Degree;
    fn sub(self, rhs: Degree) -> Degree {
        Degree(self.0 - rhs.0)
    }
}

impl Neg for Degree {
    type Output = Degree;
    fn neg(self) -> Degree {
        Degree(-self.0)
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Falling factorial `δ(δ−1)⋯(δ−α+1)` for real `δ`.
pub fn falling_factorial(delta: f64, alpha: usize) -> f64 {
    (0..alpha).fold(1.0, |acc, i| acc * (delta - i as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_parsing() {
        assert_eq!(Degree::try_from_f64(-0.5).unwrap(), Degree::from_halves(-1));
        assert_eq!(Degree::try_from_f64(3.0).unwrap(), Degree::from_int(3));
        assert!(Degree::try_from_f64(0.3).is_err());
        assert!(Degree::try_from_f64(f64::NAN).is_err());
    }

    #[test]
    fn steps() {
        let m = Degree::from_int(0);
        assert_eq!(m.steps_above(Degree::from_int(-3)), Some(3));
        assert_eq!(m.steps_above(Degree::from_halves(-1)), None);
        assert_eq!(m.steps_above(Degree::from_int(1)), None);
        assert_eq!(m.minus_steps(2), Degree::from_int(-2));
        assert_eq!(format!("{}", Degree::from_halves(-1)), "-1/2");
    }

    #[test]
    fn falling_factorial_values() {
        assert_eq!(falling_factorial(3.0, 0), 1.0);
        assert_eq!(falling_factorial(3.0, 2), 6.0);
        assert_eq!(falling_factorial(-1.0, 3), -6.0);
        assert_eq!(falling_factorial(0.0, 1), 0.0);
    }
}
