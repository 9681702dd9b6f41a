use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `{a < x < b, t1 < y < t2}` with `t2 = None` meaning `y > t1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    a: f64,
    b: f64,
    t1: f64,
    t2: Option<f64>,
}

impl Rectangle {
    pub fn new(a: f64, b: f64, t1: f64, t2: Option<f64>) -> Result<Self> {
        let finite = a.is_finite() && b.is_finite() && t1.is_finite() && t2.map_or(true, f64::is_finite);
        if !finite {
            return Err(Error::InvalidRegion("bounds must be finite (use None for t2 = inf)".into()));
        }
        if a >= b {
            return Err(Error::InvalidRegion(format!("need a < b, got a = {a}, b = {b}")));
        }
        if b - a > 1.0 {
            return Err(Error::InvalidRegion(format!("width {} exceeds one period", b - a)));
        }
        if t1 <= 0.0 {
            return Err(Error::InvalidRegion(format!("need t1 > 0, got {t1}")));
        }
        if let Some(t2) = t2 {
            if t2 <= t1 {
                return Err(Error::InvalidRegion(format!("need t1 < t2, got {t1} and {t2}")));
            }
        }
        Ok(Rectangle { a, b, t1, t2 })
    }

    /// Full-width strip `y > t`.
    pub fn strip(t: f64) -> Result<Self> {
        Rectangle::new(-0.5, 0.5, t, None)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> Option<f64> {
        self.t2
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// Spans a whole period, so every off-diagonal character integrates to 0.
    pub fn is_full_width(&self) -> bool {
        self.b - self.a == 1.0
    }

    pub fn contains(&self, other: &Rectangle) -> bool {
        let top = |r: &Rectangle| r.t2.unwrap_or(f64::INFINITY);
        self.a <= other.a && other.b <= self.b && self.t1 <= other.t1 && top(other) <= top(self)
    }
}

/// `{a < x < b, y > T}` with `-1/2 <= a < b <= 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiegelDomain {
    a: f64,
    b: f64,
    t: f64,
}

impl SiegelDomain {
    pub fn new(a: f64, b: f64, t: f64) -> Result<Self> {
        if !(-0.5..=0.5).contains(&a) || !(-0.5..=0.5).contains(&b) {
            return Err(Error::InvalidRegion(format!("a, b must lie in [-1/2, 1/2], got {a}, {b}")));
        }
        Rectangle::new(a, b, t, None)?;
        Ok(SiegelDomain { a, b, t })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn to_rectangle(&self) -> Rectangle {
        Rectangle {
            a: self.a,
            b: self.b,
            t1: self.t,
            t2: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Rectangle::new(0.0, 0.25, 1.0, Some(2.0)).is_ok());
        assert!(Rectangle::new(0.25, 0.0, 1.0, None).is_err());
        assert!(Rectangle::new(-0.6, 0.5, 1.0, None).is_err());
        assert!(Rectangle::new(0.0, 0.5, 0.0, None).is_err());
        assert!(Rectangle::new(0.0, 0.5, 2.0, Some(1.0)).is_err());
        assert!(Rectangle::new(0.0, 0.5, 1.0, Some(f64::INFINITY)).is_err());
        assert!(SiegelDomain::new(-0.5, 0.7, 1.0).is_err());
        assert!(Rectangle::strip(1.0).unwrap().is_full_width());
        let s = SiegelDomain::new(-0.5, 0.5, 120.0).unwrap();
        assert_eq!(s.to_rectangle(), Rectangle::strip(120.0).unwrap());
    }

    #[test]
    fn containment() {
        let big = Rectangle::new(-0.5, 0.5, 1.0, None).unwrap();
        let small = Rectangle::new(0.0, 0.25, 1.5, Some(3.0)).unwrap();
        assert!(big.contains(&small));
        assert!(!small.contains(&big));
    }
}
