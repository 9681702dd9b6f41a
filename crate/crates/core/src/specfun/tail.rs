use rug::float::Constant;
use rug::Float;

use super::gamma::{log_factorial, reg_inc_gamma_q};
use super::logreal::LogReal;
use crate::error::{Error, Result};

/// Default cap on the truncation search.
pub const DEFAULT_TRUNCATION_CAP: u64 = 10_000_000;

/// Precision used for the truncation bounds; they only steer an index.
const BOUND_PREC: u32 = 128;

/// Upper bound for `sum_{n > k} n^K e^{-alpha n}`.
///
/// With `f(x) = x^K e^{-alpha x}` the ratio `f(n+1)/f(n)` decreases in `n`, so
/// the tail is at most `max{f(k+1)/f(k), 1} * int_k^inf f`, and the integral
/// is `K! Q(K+1, alpha k) / alpha^{K+1}`.
pub fn exp_poly_tail_bound(big_k: u32, alpha: &Float, k: u64) -> Result<LogReal> {
    if !(alpha.is_finite() && *alpha > 0) {
        return Err(Error::Domain(format!("tail bound needs alpha > 0, got {alpha}")));
    }
    if k < 1 {
        return Err(Error::Domain("tail bound needs k >= 1".into()));
    }
    let prec = alpha.prec();
    let kf = Float::with_val(prec, k);
    let ratio_log = Float::with_val(prec, (Float::with_val(prec, k + 1) / &kf).ln() * big_k) - alpha;
    let factor = if ratio_log > 0 { ratio_log } else { Float::new(prec) };
    let x = Float::with_val(prec, alpha * &kf);
    let q = reg_inc_gamma_q(u64::from(big_k) + 1, &x)?;
    let log = factor + log_factorial(u64::from(big_k), prec).logmag() + q.ln()
        - Float::with_val(prec, alpha.ln_ref()) * (big_k + 1);
    Ok(LogReal::exp(log))
}

/// Certified truncation of `sum_n lambda(n)^2 Q(k-1, 4 pi n T)`.
#[derive(Clone, Debug)]
pub struct TruncationIndex {
    /// Number of terms kept.
    pub n: u64,
    /// Upper bound on the discarded tail.
    pub tail: LogReal,
}

/// Majorant of the tail beyond `n`, valid once `4 pi n T >= k - 2`.
///
/// Uses `lambda(n)^2 <= d(n)^2 <= 4n` and, for `x >= k-2`,
/// `Q(k-1, x) <= (k-1) x^{k-2} e^{-x} / (k-2)!`.
pub fn truncation_tail_bound(k: u32, t: f64, n: u64) -> Result<LogReal> {
    let prec = BOUND_PREC;
    let alpha = Float::with_val(prec, Constant::Pi) * 4u32 * t;
    let lead = Float::with_val(prec, 4 * (k - 1)).ln() + Float::with_val(prec, alpha.ln_ref()) * (k - 2)
        - log_factorial(u64::from(k - 2), prec).logmag();
    let sum = exp_poly_tail_bound(k - 1, &alpha, n)?;
    Ok(sum.mul(&LogReal::exp(lead)))
}

/// Smallest `N* >= ceil(k / (2 pi T))` whose certified tail is below
/// `exp(eps_log)`, found by doubling and then bisection.
pub fn series_truncation_index(k: u32, t: f64, eps_log: f64) -> Result<TruncationIndex> {
    series_truncation_index_capped(k, t, eps_log, DEFAULT_TRUNCATION_CAP)
}

pub fn series_truncation_index_capped(k: u32, t: f64, eps_log: f64, cap: u64) -> Result<TruncationIndex> {
    if k < 4 {
        return Err(Error::InvalidWeight(k));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("truncation needs T > 0, got {t}")));
    }
    let target = Float::with_val(BOUND_PREC, eps_log);
    let start = ((f64::from(k) / (2.0 * std::f64::consts::PI * t)).ceil() as u64).max(1);
    let ok = |n: u64| -> Result<Option<LogReal>> {
        let b = truncation_tail_bound(k, t, n)?;
        Ok((*b.logmag() <= target).then_some(b))
    };
    if let Some(tail) = ok(start)? {
        return Ok(TruncationIndex { n: start, tail });
    }
    let (mut lo, mut hi) = (start, start);
    let mut hi_tail;
    loop {
        hi = hi.saturating_mul(2);
        if hi > cap {
            return Err(Error::NoConvergence { cap });
        }
        if let Some(b) = ok(hi)? {
            hi_tail = b;
            break;
        }
        lo = hi;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match ok(mid)? {
            Some(b) => {
                hi = mid;
                hi_tail = b;
            }
            None => lo = mid,
        }
    }
    Ok(TruncationIndex { n: hi, tail: hi_tail })
}
