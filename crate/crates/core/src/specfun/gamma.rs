use std::sync::Mutex;

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use super::logreal::LogReal;
use crate::error::{Error, Result};
use crate::qseries::bernoulli_numbers;

/// Largest argument for which `ln m!` is taken from the exact factorial.
pub const DIRECT_FACTORIAL_MAX: u64 = 10_000;

/// Extra bits carried internally by the functions in this module.
const GUARD_BITS: u32 = 32;

static BERNOULLI: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

fn bernoulli(n: usize) -> Rational {
    let mut cache = BERNOULLI.lock().expect("bernoulli cache poisoned");
    if cache.len() <= n {
        *cache = bernoulli_numbers((2 * n).max(64));
    }
    cache[n].clone()
}

/// `ln m!` at `prec` bits.
pub fn log_factorial(m: u64, prec: u32) -> LogReal {
    if m <= DIRECT_FACTORIAL_MAX {
        log_factorial_direct(m, prec)
    } else {
        log_factorial_stirling(m, prec)
    }
}

/// `ln m!` from the exact integer factorial.
pub fn log_factorial_direct(m: u64, prec: u32) -> LogReal {
    if m < 2 {
        return LogReal::one(prec);
    }
    let m = u32::try_from(m).expect("factorial argument too large for the direct path");
    let f = Integer::from(Integer::factorial(m));
    LogReal::exp(Float::with_val(prec + GUARD_BITS, &f).ln()).rounded(prec)
}

/// `ln m!` from the Stirling series, summed until the first omitted term
/// (which bounds the remainder) falls below the working precision.
pub fn log_factorial_stirling(m: u64, prec: u32) -> LogReal {
    assert!(m >= 1, "Stirling series needs m >= 1");
    let wp = prec + GUARD_BITS;
    let x = Float::with_val(wp, m);
    let lnx = Float::with_val(wp, x.ln_ref());
    let two_pi = Float::with_val(wp, Constant::Pi) * 2u32;
    let mut s = Float::with_val(wp, &x + 0.5f64) * &lnx - &x + two_pi.ln() / 2u32;
    let x2 = Float::with_val(wp, x.square_ref());
    let mut xpow = x.clone();
    let eps = Float::with_val(wp, Float::i_exp(1, -(wp as i32)));
    for j in 1u32.. {
        let b = bernoulli(2 * j as usize);
        let denom = Integer::from(2 * j) * (2 * j - 1);
        let term = Float::with_val(wp, &b) / denom / &xpow;
        s += &term;
        if term.abs() < Float::with_val(wp, &eps * &s) {
            break;
        }
        xpow *= &x2;
    }
    LogReal::exp(s).rounded(prec)
}

/// Regularized upper incomplete Gamma `Q(s, x)` for integer shape.
#[derive(Clone, Debug)]
pub struct GammaQ {
    /// `Q(s, x)` in log form; meaningful even when `underflow` is set.
    pub log: LogReal,
    /// `ln Q < -4 * prec * ln 2`; the plain value is reported as zero.
    pub underflow: bool,
}

impl GammaQ {
    /// Plain value, exactly zero when flagged as underflow.
    pub fn value(&self) -> Float {
        if self.underflow {
            Float::new(self.log.prec())
        } else {
            self.log.to_float().expect("non-underflowed Q is representable")
        }
    }

    pub fn ln(&self) -> &Float {
        self.log.logmag()
    }
}

/// `Q(s, x) = e^{-x} sum_{m<s} x^m / m!` at the precision of `x`.
///
/// The sum is taken relative to its largest term `m* = min(floor x, s-1)`
/// and extended outward in both directions; each direction stops once a
/// geometric bound on the remaining terms drops below the working precision.
pub fn reg_inc_gamma_q(s: u64, x: &Float) -> Result<GammaQ> {
    let prec = x.prec();
    if s < 1 {
        return Err(Error::Domain(format!("incomplete Gamma shape must be >= 1, got {s}")));
    }
    if x.is_nan() || *x < 0 {
        return Err(Error::Domain(format!("incomplete Gamma argument must be >= 0, got {x}")));
    }
    if x.is_zero() {
        return Ok(GammaQ {
            log: LogReal::one(prec),
            underflow: false,
        });
    }
    let wp = prec + GUARD_BITS;
    let x = Float::with_val(wp, x);
    let fl = x.to_integer_round(rug::float::Round::Down).expect("finite").0;
    let mstar = fl.to_u64().map_or(s - 1, |f| f.min(s - 1));

    let lead = Float::with_val(wp, x.ln_ref()) * mstar - &x - log_factorial(mstar, wp).logmag();
    let eps = Float::with_val(wp, Float::i_exp(1, -(wp as i32) - 8));

    let mut sum = Float::with_val(wp, 1u32);
    // Downward: r_{m-1} = r_m * m / x.
    let mut r = Float::with_val(wp, 1u32);
    let mut m = mstar;
    while m > 0 {
        let q = Float::with_val(wp, m) / &x;
        r *= &q;
        sum += &r;
        m -= 1;
        let next_q = Float::with_val(wp, m) / &x;
        if next_q < 1u32 {
            let rest = Float::with_val(wp, &r * &next_q) / (1u32 - next_q);
            if rest < Float::with_val(wp, &sum * &eps) {
                break;
            }
        }
    }
    // Upward: r_{m+1} = r_m * x / (m + 1).
    let mut r = Float::with_val(wp, 1u32);
    let mut m = mstar;
    while m + 1 < s {
        let q = Float::with_val(wp, &x / (m + 1));
        r *= &q;
        sum += &r;
        m += 1;
        let next_q = Float::with_val(wp, &x / (m + 1));
        if next_q < 1u32 {
            let rest = Float::with_val(wp, &r * &next_q) / (1u32 - next_q);
            if rest < Float::with_val(wp, &sum * &eps) {
                break;
            }
        }
    }

    // Q <= 1; rounding can push the log a few ulps above zero.
    let logq = Float::with_val(prec, lead + sum.ln()).min(&Float::new(prec));
    let floor = -4.0 * f64::from(prec) * std::f64::consts::LN_2;
    let underflow = logq < floor;
    Ok(GammaQ {
        log: LogReal::exp(logq),
        underflow,
    })
}

/// `1 - Q(k-1, k - k^{1/2+delta})`: the distance from one of the incomplete
/// Gamma ratio at the cut `k - k^{1/2+delta}`.
pub fn gamma_lemma_gap(k: u64, delta: f64, prec: u32) -> Result<Float> {
    let x = gamma_lemma_argument(k, delta, prec)?;
    let q = reg_inc_gamma_q(k - 1, &x)?;
    Ok(Float::with_val(prec, 1u32 - q.value()))
}

/// The cut point `k - k^{1/2+delta}`, validated.
pub fn gamma_lemma_argument(k: u64, delta: f64, prec: u32) -> Result<Float> {
    if k < 4 {
        return Err(Error::Domain(format!("gamma lemma needs k >= 4, got {k}")));
    }
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::Domain(format!("delta must lie in [0, 1/2), got {delta}")));
    }
    let kf = Float::with_val(prec, k);
    let cut = Float::with_val(prec, (&kf).pow(&Float::with_val(prec, 0.5 + delta)));
    if cut >= kf {
        return Err(Error::Domain(format!("k^(1/2+delta) >= k for k = {k}, delta = {delta}")));
    }
    Ok(kf - cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: u32 = 256;

    fn q(s: u64, x: f64) -> Float {
        reg_inc_gamma_q(s, &Float::with_val(P, x)).unwrap().value()
    }

    fn tol(bits: i32) -> Float {
        Float::with_val(P, Float::i_exp(1, -bits))
    }

    #[test]
    fn log_factorial_small_values() {
        assert!(log_factorial(0, P).logmag().is_zero());
        assert!(log_factorial(1, P).logmag().is_zero());
        let l10 = log_factorial(10, P).logmag().to_f64();
        assert!((l10 - 15.104_412_573_075_516).abs() < 1e-13);
    }

    #[test]
    fn stirling_matches_direct_factorial() {
        for m in [10_001u64, 20_000, 100_000] {
            let d = log_factorial_direct(m, P);
            let s = log_factorial_stirling(m, P);
            let rel = Float::with_val(P, d.logmag() - s.logmag()).abs() / d.logmag();
            assert!(rel < tol(P as i32 - 10), "m = {m}");
        }
        // MPFR lngamma as a third route
        let m = 54_321u64;
        let lg = Float::with_val(P, m + 1).ln_gamma();
        let rel = Float::with_val(P, log_factorial(m, P).logmag() - &lg).abs() / lg;
        assert!(rel < tol(P as i32 - 10));
    }

    #[test]
    fn q_closed_forms() {
        assert_eq!(q(7, 0.0), 1);
        let e = Float::with_val(P, -3.5f64).exp();
        assert!(Float::with_val(P, q(1, 3.5) - &e).abs() < tol(250));
        let want = Float::with_val(P, -2i32).exp() * 5u32;
        assert!(Float::with_val(P, q(3, 2.0) - &want).abs() < tol(250));
        assert!((q(3, 2.0).to_f64() - 0.676_676_416_2).abs() < 1e-10);
    }

    #[test]
    fn q_rejects_bad_arguments() {
        assert!(reg_inc_gamma_q(0, &Float::with_val(P, 1)).is_err());
        assert!(reg_inc_gamma_q(3, &Float::with_val(P, -1)).is_err());
    }

    #[test]
    fn q_large_shape_against_mpfr_gamma_inc() {
        // Q(s, x) = Gamma(s, x) / (s-1)!
        for (s, x) in [(120u64, 100.0), (120, 150.0), (1000, 990.5), (11, 12.566)] {
            let xf = Float::with_val(P, x);
            let g = Float::with_val(P, Float::with_val(P, s).gamma_inc_ref(&xf));
            let want = g / Float::with_val(P, Integer::from(Integer::factorial(s as u32 - 1)));
            let got = q(s, x);
            let rel = Float::with_val(P, &got - &want).abs() / &want;
            assert!(rel < tol(200), "s = {s}, x = {x}: rel {rel}");
        }
    }

    #[test]
    fn underflow_is_flagged_but_log_survives() {
        let r = reg_inc_gamma_q(11, &Float::with_val(P, 2000.0)).unwrap();
        assert!(r.underflow);
        assert!(r.value().is_zero());
        let l = r.ln().to_f64();
        // ln Q ~ -x + 10 ln x - ln 10!
        let approx = -2000.0 + 10.0 * 2000f64.ln() - 15.104_412_573;
        assert!((l - approx).abs() < 0.01);
    }

    #[test]
    fn gap_trivial_reduction() {
        // k = 4, delta = 0: argument 4 - 2 = 2
        let g = gamma_lemma_gap(4, 0.0, P).unwrap();
        let want = 1.0 - 5.0 * (-2f64).exp();
        assert!((g.to_f64() - want).abs() < 1e-15);
        assert!(gamma_lemma_gap(4, 0.6, P).is_err());
        assert!(gamma_lemma_gap(3, 0.1, P).is_err());
    }

    #[test]
    fn gap_decreases_with_k() {
        let gaps: Vec<f64> = [100u64, 1000, 10_000].iter().map(|&k| gamma_lemma_gap(k, 0.1, P).unwrap().to_f64()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn q_monotone_in_both_arguments(s in 1u64..300, u in 0.5f64..3.0, dx in 1e-3f64..5.0) {
            let x = s as f64 * u;
            prop_assert!(q(s, x + dx) < q(s, x));
            prop_assert!(q(s + 1, x) > q(s, x));
        }
    }
}
