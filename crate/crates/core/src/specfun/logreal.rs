use std::cmp::Ordering;
use std::fmt;

use rug::float::Special;
use rug::Float;

use crate::error::{Error, Result};

/// Largest natural log that still converts to a plain [`Float`] under the
/// default MPFR exponent range.
pub const MAX_FLOAT_LOG: f64 = 7.0e8;
/// Largest natural log convertible to `f64`.
pub const MAX_F64_LOG: f64 = 709.0;

/// A real number stored as a sign and the natural log of its magnitude.
///
/// Products add logs. Sums factor out the larger magnitude:
/// `ln(a + b) = l_max + ln1p(exp(l_min - l_max))` for like signs and
/// `l_max + ln(-expm1(l_min - l_max))` for unlike signs.
#[derive(Clone, Debug)]
pub struct LogReal {
    sign: i8,
    logmag: Float,
}

impl LogReal {
    pub fn zero(prec: u32) -> Self {
        LogReal {
            sign: 0,
            logmag: Float::with_val(prec, Special::NegInfinity),
        }
    }

    pub fn one(prec: u32) -> Self {
        LogReal {
            sign: 1,
            logmag: Float::new(prec),
        }
    }

    /// `sign * exp(logmag)`. A zero sign yields zero regardless of `logmag`.
    pub fn from_parts(sign: i8, logmag: Float) -> Self {
        let prec = logmag.prec();
        match sign.signum() {
            0 => LogReal::zero(prec),
            s => {
                assert!(!logmag.is_nan(), "NaN log magnitude");
                LogReal { sign: s, logmag }
            }
        }
    }

    /// Positive number `exp(logmag)`.
    pub fn exp(logmag: Float) -> Self {
        LogReal::from_parts(1, logmag)
    }

    pub fn from_float(x: &Float) -> Self {
        if x.is_zero() {
            return LogReal::zero(x.prec());
        }
        let sign = if x.is_sign_negative() { -1 } else { 1 };
        LogReal {
            sign,
            logmag: Float::with_val(x.prec(), x.abs_ref()).ln(),
        }
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        LogReal::from_float(&Float::with_val(prec, x))
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Natural log of the magnitude (`-inf` for zero).
    pub fn logmag(&self) -> &Float {
        &self.logmag
    }

    pub fn prec(&self) -> u32 {
        self.logmag.prec()
    }

    /// Copy with the log magnitude rounded to `prec` bits.
    pub fn rounded(&self, prec: u32) -> LogReal {
        LogReal::from_parts(self.sign, Float::with_val(prec, &self.logmag))
    }

    pub fn neg(&self) -> LogReal {
        LogReal {
            sign: -self.sign,
            logmag: self.logmag.clone(),
        }
    }

    pub fn abs(&self) -> LogReal {
        LogReal {
            sign: self.sign.abs(),
            logmag: self.logmag.clone(),
        }
    }

    pub fn mul(&self, other: &LogReal) -> LogReal {
        if self.is_zero() || other.is_zero() {
            return LogReal::zero(self.prec().max(other.prec()));
        }
        LogReal {
            sign: self.sign * other.sign,
            logmag: Float::with_val(self.prec().max(other.prec()), &self.logmag + &other.logmag),
        }
    }

    /// Panics on division by zero.
    pub fn div(&self, other: &LogReal) -> LogReal {
        assert!(!other.is_zero(), "division by zero");
        if self.is_zero() {
            return self.clone();
        }
        LogReal {
            sign: self.sign * other.sign,
            logmag: Float::with_val(self.prec().max(other.prec()), &self.logmag - &other.logmag),
        }
    }

    /// `self^e` for a real exponent; requires a nonnegative base.
    pub fn powf(&self, e: &Float) -> LogReal {
        assert!(self.sign >= 0, "real power of a negative number");
        if self.is_zero() {
            return self.clone();
        }
        LogReal::exp(Float::with_val(self.prec(), &self.logmag * e))
    }

    pub fn sqrt(&self) -> LogReal {
        assert!(self.sign >= 0, "square root of a negative number");
        if self.is_zero() {
            return self.clone();
        }
        LogReal::exp(Float::with_val(self.prec(), &self.logmag / 2u32))
    }

    pub fn add(&self, other: &LogReal) -> LogReal {
        let prec = self.prec().max(other.prec());
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let (big, small) = if self.logmag >= other.logmag { (self, other) } else { (other, self) };
        let diff = Float::with_val(prec, &small.logmag - &big.logmag);
        let e = diff.exp();
        if big.sign == small.sign {
            LogReal {
                sign: big.sign,
                logmag: Float::with_val(prec, &big.logmag + e.ln_1p()),
            }
        } else if e == 1 {
            LogReal::zero(prec)
        } else {
            // ln(1 - e) with e in [0, 1)
            let one_minus = Float::with_val(prec, 1u32 - &e);
            LogReal {
                sign: big.sign,
                logmag: Float::with_val(prec, &big.logmag + one_minus.ln()),
            }
        }
    }

    pub fn sub(&self, other: &LogReal) -> LogReal {
        self.add(&other.neg())
    }

    /// Plain value; errors instead of saturating outside the MPFR range.
    pub fn to_float(&self) -> Result<Float> {
        if self.is_zero() {
            return Ok(Float::new(self.prec()));
        }
        let l = self.logmag.to_f64();
        if l.abs() > MAX_FLOAT_LOG {
            return Err(Error::Overflow(l));
        }
        let v = Float::with_val(self.prec(), self.logmag.exp_ref());
        Ok(if self.sign < 0 { -v } else { v })
    }

    /// `f64` value; errors outside `exp(+-709)`.
    pub fn to_f64(&self) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let l = self.logmag.to_f64();
        if l.abs() > MAX_F64_LOG {
            return Err(Error::Overflow(l));
        }
        Ok(f64::from(self.sign) * l.exp())
    }

    /// Ordering of the represented reals.
    pub fn cmp_value(&self, other: &LogReal) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {}
            o => return o,
        }
        let by_mag = self.logmag.partial_cmp(&other.logmag).unwrap_or(Ordering::Equal);
        match self.sign {
            0 => Ordering::Equal,
            1 => by_mag,
            _ => by_mag.reverse(),
        }
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(f, "{}exp({})", if s < 0 { "-" } else { "" }, self.logmag.to_f64()),
        }
    }
}

/// Sign-split accumulator: positive and negative terms are summed separately
/// (each by factoring out its largest log) and combined once at the end.
/// Terms are accumulated in insertion order, so results are reproducible.
#[derive(Clone, Debug)]
pub struct LogSum {
    prec: u32,
    pos: Vec<Float>,
    neg: Vec<Float>,
}

impl LogSum {
    pub fn new(prec: u32) -> Self {
        LogSum {
            prec,
            pos: Vec::new(),
            neg: Vec::new(),
        }
    }

    pub fn push(&mut self, term: &LogReal) {
        match term.sign {
            0 => {}
            1 => self.pos.push(term.logmag.clone()),
            _ => self.neg.push(term.logmag.clone()),
        }
    }

    pub fn extend(&mut self, other: LogSum) {
        self.pos.extend(other.pos);
        self.neg.extend(other.neg);
    }

    pub fn len(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn part(prec: u32, logs: &[Float]) -> LogReal {
        let Some(max) = logs.iter().max_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal)) else {
            return LogReal::zero(prec);
        };
        let mut s = Float::new(prec);
        for l in logs {
            s += Float::with_val(prec, l - max).exp();
        }
        LogReal::exp(Float::with_val(prec, max + s.ln()))
    }

    /// Positive part, negative part (as a positive magnitude) and their sum.
    pub fn parts(&self) -> (LogReal, LogReal) {
        (Self::part(self.prec, &self.pos), Self::part(self.prec, &self.neg))
    }

    pub fn total(&self) -> LogReal {
        let (p, n) = self.parts();
        p.sub(&n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: u32 = 256;

    fn lr(x: f64) -> LogReal {
        LogReal::from_f64(x, P)
    }

    fn close(a: &LogReal, b: f64, tol: f64) -> bool {
        (a.to_f64().unwrap() - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn arithmetic_basics() {
        assert!(close(&lr(3.0).add(&lr(4.0)), 7.0, 1e-15));
        assert!(close(&lr(3.0).add(&lr(-4.0)), -1.0, 1e-15));
        assert!(close(&lr(-3.0).mul(&lr(4.0)), -12.0, 1e-15));
        assert!(close(&lr(3.0).div(&lr(-4.0)), -0.75, 1e-15));
        assert!(lr(2.5).sub(&lr(2.5)).is_zero());
        assert!(lr(0.0).is_zero());
        assert!(close(&lr(0.0).add(&lr(5.0)), 5.0, 1e-15));
    }

    #[test]
    fn extreme_magnitudes_stay_finite() {
        let tiny = LogReal::exp(Float::with_val(P, -1.0e6));
        let huge = LogReal::exp(Float::with_val(P, 1.0e6));
        let prod = tiny.mul(&huge);
        assert!(prod.logmag().clone().abs() < 1e-60);
        assert!(matches!(huge.to_f64(), Err(Error::Overflow(_))));
        assert!(huge.to_float().is_ok());
        let beyond = LogReal::exp(Float::with_val(P, 1.0e9));
        assert!(matches!(beyond.to_float(), Err(Error::Overflow(_))));
    }

    #[test]
    fn sign_split_sum() {
        let mut s = LogSum::new(P);
        for x in [1.0, -2.0, 3.0, -4.0, 10.0] {
            s.push(&lr(x));
        }
        assert!(close(&s.total(), 8.0, 1e-15));
        let (p, n) = s.parts();
        assert!(close(&p, 14.0, 1e-15));
        assert!(close(&n, 6.0, 1e-15));
        assert!(LogSum::new(P).total().is_zero());
    }

    #[test]
    fn ordering() {
        assert_eq!(lr(-3.0).cmp_value(&lr(-2.0)), Ordering::Less);
        assert_eq!(lr(3.0).cmp_value(&lr(2.0)), Ordering::Greater);
        assert_eq!(lr(0.0).cmp_value(&lr(-2.0)), Ordering::Greater);
    }

    proptest! {
        #[test]
        fn addition_commutes_exactly(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let (x, y) = (lr(a), lr(b));
            let (s1, s2) = (x.add(&y), y.add(&x));
            prop_assert_eq!(s1.sign(), s2.sign());
            if !s1.is_zero() {
                prop_assert_eq!(s1.logmag(), s2.logmag());
            }
        }

        #[test]
        fn addition_is_associative_to_precision(a in 1e-3f64..1e3, b in 1e-3f64..1e3, c in 1e-3f64..1e3) {
            let (x, y, z) = (lr(a), lr(b), lr(c));
            let l = x.add(&y).add(&z);
            let r = x.add(&y.add(&z));
            let d = Float::with_val(P, l.logmag() - r.logmag()).abs();
            prop_assert!(d < Float::with_val(P, Float::i_exp(1, -240)));
        }
    }
}
