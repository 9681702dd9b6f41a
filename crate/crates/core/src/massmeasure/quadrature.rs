use std::f64::consts::PI;
use std::sync::OnceLock;

use rug::float::Constant;
use rug::Float;

use crate::eigenforms::Eigenform;
use crate::error::{Error, Result};
use crate::specfun::{log_factorial, reg_inc_gamma_q, series_truncation_index, LogReal, LogSum};

/// Relative size below which Fourier terms are dropped inside the quadrature
/// region (`e^-46 ~ 1e-20`).
const TERM_CUTOFF_LOG: f64 = -46.0;
const MAX_DEPTH: u32 = 40;
/// Consecutive refinements that fail to halve the error before giving up.
const MAX_STALLS: u32 = 8;
/// Relative accuracy of the Parseval strip sum, as a power of two.
const STRIP_REL_BITS: f64 = 230.0;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn rules() -> &'static (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    static RULES: OnceLock<(Vec<(f64, f64)>, Vec<(f64, f64)>)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(10), gauss_legendre(20)))
}

fn apply(rule: &[(f64, f64)], f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    let mut s = 0.0;
    for &(x, w) in rule {
        s += w * f(c + h * x)?;
    }
    Ok(s * h)
}

/// Adaptive panel integration. A panel is accepted when its 10- and 20-point
/// rules differ by at most `rel * |I| + abs_per_width * (b - a)`.
pub(crate) struct Adaptive {
    pub rel: f64,
    pub abs_per_width: f64,
}

impl Adaptive {
    pub(crate) fn integrate(&self, f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, usize)> {
        self.panel(f, a, b, 0, f64::INFINITY, 0)
    }

    fn panel(
        &self,
        f: &dyn Fn(f64) -> Result<f64>,
        a: f64,
        b: f64,
        depth: u32,
        parent_err: f64,
        stalls: u32,
    ) -> Result<(f64, usize)> {
        let (r10, r20) = rules();
        let g10 = apply(r10, f, a, b)?;
        let g20 = apply(r20, f, a, b)?;
        let err = (g20 - g10).abs();
        if err <= self.rel * g20.abs() + self.abs_per_width * (b - a) {
            return Ok((g20, 1));
        }
        let stalls = if err > parent_err / 2.0 { stalls + 1 } else { 0 };
        if depth >= MAX_DEPTH || stalls > MAX_STALLS || !err.is_finite() {
            return Err(Error::QuadratureStall { a, b, depth });
        }
        let m = (a + b) / 2.0;
        let (l, nl) = self.panel(f, a, m, depth + 1, err, stalls)?;
        let (r, nr) = self.panel(f, m, b, depth + 1, err, stalls)?;
        Ok((l + r, nl + nr))
    }
}

/// `lambda(n)` in double precision with `ln n`, for the quadrature region.
struct Scaled {
    k: f64,
    lam: Vec<f64>,
    ln_n: Vec<f64>,
}

impl Scaled {
    fn new(form: &Eigenform, n: usize) -> Self {
        Scaled {
            k: f64::from(form.weight()),
            lam: form.lambdas()[..n].iter().map(Float::to_f64).collect(),
            ln_n: (1..=n).map(|n| (n as f64).ln()).collect(),
        }
    }

    /// Terms `lambda(n) e^{t_n - S}` with `t_n = (k-1)/2 ln n - 2 pi n y` and
    /// `S = max t_n`; returns the terms and `S`.
    fn coeffs(&self, y: f64) -> (Vec<f64>, f64) {
        let half = (self.k - 1.0) / 2.0;
        let t: Vec<f64> = self
            .ln_n
            .iter()
            .enumerate()
            .map(|(i, l)| half * l - 2.0 * PI * (i + 1) as f64 * y)
            .collect();
        let s = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (self.lam.iter().zip(&t).map(|(l, ti)| l * (ti - s).exp()).collect(), s)
    }

    /// `e^{-S} f(x + iy)` as (re, im).
    fn eval(c: &[f64], x: f64) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, ci) in c.iter().enumerate() {
            let (s, co) = (2.0 * PI * (i + 1) as f64 * x).sin_cos();
            re += ci * co;
            im += ci * s;
        }
        (re, im)
    }
}

/// Fourier terms needed so that everything dropped inside `y >= sqrt(3)/2`
/// is below `e^-46` relative to the largest term (Deligne-bounded).
pub fn quadrature_ncoeffs(k: u32) -> usize {
    let ymin = 3f64.sqrt() / 2.0;
    let half = (f64::from(k) - 1.0) / 2.0;
    let t = |n: f64| half * n.ln() - 2.0 * PI * n * ymin;
    let peak = (half / (2.0 * PI * ymin)).max(1.0);
    let s = t(peak.floor().max(1.0)).max(t(peak.ceil()));
    let mut n = peak.ceil() as usize;
    while t(n as f64) + (2.0 * (n as f64).sqrt()).ln() - s > TERM_CUTOFF_LOG {
        n += 1;
    }
    n
}

/// Number of terms for the Parseval strip `y > y0`: the certified tail is
/// below `2^-230` times the first term.
pub fn strip_ncoeffs(k: u32, y0: f64) -> Result<usize> {
    let prec = 128;
    let x = Float::with_val(prec, Constant::Pi) * 4u32 * y0;
    let q1 = reg_inc_gamma_q(u64::from(k - 1), &x)?;
    let eps = q1.ln().to_f64() - STRIP_REL_BITS * std::f64::consts::LN_2;
    Ok(series_truncation_index(k, y0, eps)?.n as usize)
}

/// `(k-2)! / (4 pi)^{k-1}` in log form.
pub(crate) fn strip_prefactor(k: u32, prec: u32) -> LogReal {
    let four_pi = Float::with_val(prec, Constant::Pi) * 4u32;
    let l = Float::with_val(prec, log_factorial(u64::from(k - 2), prec).logmag() - four_pi.ln() * (k - 1));
    LogReal::exp(l)
}

/// `sum_{n <= count} l1(n) l2(n) Q(k-1, 4 pi n y)`.
pub(crate) fn parseval_sum(f1: &Eigenform, f2: &Eigenform, y: f64, count: usize) -> Result<LogReal> {
    let prec = f1.precision_bits().min(f2.precision_bits());
    let k = f1.weight();
    let four_pi_y = Float::with_val(prec, Constant::Pi) * 4u32 * y;
    let mut acc = LogSum::new(prec);
    for n in 1..=count {
        let q = reg_inc_gamma_q(u64::from(k - 1), &Float::with_val(prec, &four_pi_y * n as u32))?;
        let c = Float::with_val(prec, f1.lambda(n).expect("checked") * f2.lambda(n).expect("checked"));
        acc.push(&LogReal::from_float(&c).mul(&q.log));
    }
    Ok(acc.total())
}

/// Pieces of a Petersson norm or inner product.
#[derive(Clone, Debug)]
pub struct NormParts {
    /// Integral over `{|x| <= 1/2, |z| >= 1, y <= Y}`.
    pub region: LogReal,
    /// Integral over `y > Y` by Parseval.
    pub strip: LogReal,
    pub total: LogReal,
    pub panels: usize,
}

fn check_inputs(form: &Eigenform, y_split: f64, quad_tol: f64) -> Result<usize> {
    if !(y_split.is_finite() && y_split >= 1.0) {
        return Err(Error::Domain(format!("split height must be >= 1, got {y_split}")));
    }
    if !(quad_tol > 0.0 && quad_tol < 1.0) {
        return Err(Error::Domain(format!("quadrature tolerance must lie in (0, 1), got {quad_tol}")));
    }
    let need_q = quadrature_ncoeffs(form.weight());
    let need_s = strip_ncoeffs(form.weight(), y_split)?;
    let need = need_q.max(need_s);
    if form.ncoeffs() < need {
        return Err(Error::InsufficientCoeffs {
            have: form.ncoeffs(),
            need,
        });
    }
    Ok(need_s)
}

/// Coefficients needed by [`petersson_norm_sq`] at the given split height.
pub fn norm_ncoeffs(k: u32, y_split: f64) -> Result<usize> {
    Ok(quadrature_ncoeffs(k).max(strip_ncoeffs(k, y_split)?))
}

/// Largest log-envelope `(k-2) ln y + S_1(y) + S_2(y)` over the y range,
/// used as a global shift so the integrand stays in double range.
fn envelope_shift(s1: &Scaled, s2: &Scaled, y_split: f64) -> f64 {
    let ymin = 3f64.sqrt() / 2.0;
    (0..=256)
        .map(|i| {
            let y = ymin + (y_split - ymin) * f64::from(i) / 256.0;
            (s1.k - 2.0) * y.ln() + s1.coeffs(y).1 + s2.coeffs(y).1
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Region integral of `e^{-shift} y^{k-2} Re(f1 conj f2)` over the truncated
/// fundamental domain, doubled from `x in [0, 1/2]` by the symmetry
/// `f(-conj z) = conj f(z)`.
fn region_integral(s1: &Scaled, s2: &Scaled, y_split: f64, shift: f64, adaptive: &Adaptive) -> Result<(f64, usize)> {
    let k = s1.k;
    let inner = |x: f64| -> Result<f64> {
        let lo = (1.0 - x * x).sqrt();
        let g = |y: f64| -> Result<f64> {
            let (c1, e1) = s1.coeffs(y);
            let (c2, e2) = s2.coeffs(y);
            let (r1, i1) = Scaled::eval(&c1, x);
            let (r2, i2) = Scaled::eval(&c2, x);
            Ok((r1 * r2 + i1 * i2) * ((k - 2.0) * y.ln() + e1 + e2 - shift).exp())
        };
        Ok(adaptive.integrate(&g, lo, y_split)?.0)
    };
    let (half, panels) = adaptive.integrate(&inner, 0.0, 0.5)?;
    Ok((2.0 * half, panels))
}

fn assemble(region: f64, shift: f64, strip: LogReal, prec: u32, panels: usize) -> NormParts {
    let region = LogReal::from_f64(region, prec).mul(&LogReal::exp(Float::with_val(prec, shift)));
    let total = region.add(&strip);
    NormParts {
        region,
        strip,
        total,
        panels,
    }
}

/// `||f||^2 = int_F y^k |f|^2 dx dy / y^2` split at height `Y`.
pub fn petersson_norm_parts(form: &Eigenform, y_split: f64, quad_tol: f64) -> Result<NormParts> {
    let ns = check_inputs(form, y_split, quad_tol)?;
    let adaptive = Adaptive {
        rel: quad_tol / 16.0,
        abs_per_width: 0.0,
    };
    let sc = Scaled::new(form, quadrature_ncoeffs(form.weight()));
    let shift = envelope_shift(&sc, &sc, y_split);
    let (region, panels) = region_integral(&sc, &sc, y_split, shift, &adaptive)?;
    let prec = form.precision_bits();
    let strip = strip_prefactor(form.weight(), prec).mul(&parseval_sum(form, form, y_split, ns)?);
    Ok(assemble(region, shift, strip, prec, panels))
}

pub fn petersson_norm_sq(form: &Eigenform, y_split: f64, quad_tol: f64) -> Result<LogReal> {
    Ok(petersson_norm_parts(form, y_split, quad_tol)?.total)
}

/// `<f1, f2> = int_F y^k f1 conj(f2) dx dy / y^2` (real for real
/// coefficients). `scale` is the size against which `quad_tol` is measured,
/// normally `||f1|| ||f2||`.
pub fn petersson_inner(
    f1: &Eigenform,
    f2: &Eigenform,
    y_split: f64,
    quad_tol: f64,
    scale: &LogReal,
) -> Result<NormParts> {
    if f1.weight() != f2.weight() {
        return Err(Error::WeightMismatch(f1.weight(), f2.weight()));
    }
    let ns = check_inputs(f1, y_split, quad_tol)?.max(check_inputs(f2, y_split, quad_tol)?);
    let prec = f1.precision_bits().min(f2.precision_bits());
    let nq = quadrature_ncoeffs(f1.weight());
    let (s1, s2) = (Scaled::new(f1, nq), Scaled::new(f2, nq));
    let shift = envelope_shift(&s1, &s2, y_split);
    // Tolerance in shifted units: quad_tol * scale * e^{-shift} per unit width.
    let scaled = Float::with_val(prec, scale.logmag() - Float::with_val(prec, shift)).to_f64();
    let width = 0.5 * (y_split - 3f64.sqrt() / 2.0);
    let adaptive = Adaptive {
        rel: 0.0,
        abs_per_width: quad_tol / 16.0 * scaled.exp() / width.max(1e-3),
    };
    let (region, panels) = region_integral(&s1, &s2, y_split, shift, &adaptive)?;
    let strip = strip_prefactor(f1.weight(), prec).mul(&parseval_sum(f1, f2, y_split, ns)?);
    Ok(assemble(region, shift, strip, prec, panels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [10usize, 20] {
            let r = gauss_legendre(n);
            let s: f64 = r.iter().map(|(_, w)| w).sum();
            assert!((s - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let m: f64 = r.iter().map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            assert!((m - 2.0 / deg as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let a = Adaptive {
            rel: 1e-12,
            abs_per_width: 0.0,
        };
        let f = |x: f64| Ok(1.0 / (1e-4 + x * x));
        let (v, panels) = a.integrate(&f, -1.0, 1.0).unwrap();
        let exact = 2.0 * (1.0 / 1e-2f64).atan() / 1e-2;
        assert!((v - exact).abs() / exact < 1e-10);
        assert!(panels > 1);
        let bad = |x: f64| Ok(if x < 0.3 { 0.0 } else { f64::NAN });
        assert!(matches!(a.integrate(&bad, 0.0, 1.0), Err(Error::QuadratureStall { .. })));
    }

    #[test]
    fn coefficient_counts_grow_with_weight() {
        assert!(quadrature_ncoeffs(12) < quadrature_ncoeffs(60));
        assert!(quadrature_ncoeffs(120) < 80);
        assert!(strip_ncoeffs(12, 2.0).unwrap() >= 1);
    }
}
