//! Petersson norms, symmetric-square values and the mass measure of
//! eigenforms over rectangles and cusp neighbourhoods.

mod quadrature;
mod region;

use num_complex::Complex64;
use rayon::prelude::*;
use rug::float::Constant;
use rug::Float;

use crate::eigenforms::{divisor_count, EigenBasis, Eigenform};
use crate::error::{Error, Result};
use crate::specfun::{log_factorial, reg_inc_gamma_q, truncation_tail_bound, LogReal, LogSum};

pub use quadrature::{
    norm_ncoeffs, petersson_inner, petersson_norm_parts, petersson_norm_sq, quadrature_ncoeffs, strip_ncoeffs,
    NormParts,
};
pub use region::{Rectangle, SiegelDomain};

/// Default split height between quadrature and the Parseval strip.
pub const DEFAULT_Y_SPLIT: f64 = 2.0;
/// Default relative quadrature tolerance.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
/// Diagonal masses below `-2^-90` signal exhausted precision.
pub const NEGATIVE_MASS_BITS: i32 = 90;
/// Off-diagonal band remainder target, relative to the diagonal.
const BAND_REL_BITS: f64 = 110.0;
/// Largest tolerated imaginary part of an admissible mass.
const IMAG_RESIDUE_BITS: i32 = 90;

/// `L(1, Sym^2 f)` in the Hoffstein-Lockhart normalization and the
/// Rankin-Selberg residue convention `R = L / zeta(2)`.
#[derive(Clone, Debug)]
pub struct Sym2Value {
    pub l: Float,
    pub r: Float,
}

/// `L = ||f||^2 (pi/2) (4 pi)^k / (k-1)!`.
pub fn sym2_l_value(form: &Eigenform, norm: &LogReal) -> Result<Sym2Value> {
    if norm.sign() <= 0 {
        return Err(Error::Domain("Petersson norm must be positive".into()));
    }
    let prec = norm.prec().max(form.precision_bits());
    let k = form.weight();
    let pi = Float::with_val(prec, Constant::Pi);
    let log = Float::with_val(prec, norm.logmag() + Float::with_val(prec, &pi / 2u32).ln())
        + Float::with_val(prec, &pi * 4u32).ln() * k
        - log_factorial(u64::from(k - 1), prec).logmag();
    let l = LogReal::exp(log).to_float()?;
    let zeta2 = Float::with_val(prec, pi.square_ref()) / 6u32;
    let r = Float::with_val(prec, &l / &zeta2);
    Ok(Sym2Value { l, r })
}

/// `I_k(T)`: normalized mass of the strip `y > T`.
#[derive(Clone, Debug)]
pub struct VerticalMass {
    pub t: f64,
    /// Reduced form `2 pi^2 / ((k-1) L) sum lambda^2 Q(k-1, 4 pi n T)`.
    pub value: LogReal,
    /// Raw form `(k-2)! / ((4 pi)^{k-1} ||f||^2) sum lambda^2 Q(k-1, 4 pi n T)`.
    pub raw: LogReal,
    /// Terms kept.
    pub n_star: usize,
    /// Certified bound on the dropped terms, normalized.
    pub tail: LogReal,
}

/// Norm, L-value and computed strip masses of one eigenform.
#[derive(Clone, Debug)]
pub struct MassProfile {
    pub weight: u32,
    pub index: usize,
    pub y_split: f64,
    pub quad_tol: f64,
    pub log_norm_sq: LogReal,
    pub sym2: Sym2Value,
    pub vertical: Vec<VerticalMass>,
}

impl MassProfile {
    /// Profile from a known norm (for example read back from a cache).
    pub fn from_norm(form: &Eigenform, log_norm_sq: LogReal, y_split: f64, quad_tol: f64) -> Result<Self> {
        let sym2 = sym2_l_value(form, &log_norm_sq)?;
        Ok(MassProfile {
            weight: form.weight(),
            index: form.index(),
            y_split,
            quad_tol,
            log_norm_sq,
            sym2,
            vertical: Vec::new(),
        })
    }

    /// Adds `I_k(T)` for every `T` not yet present; returns the new profile.
    pub fn with_vertical(mut self, form: &Eigenform, ts: &[f64]) -> Result<Self> {
        for &t in ts {
            if self.vertical_at(t).is_none() {
                let v = vertical_mass(form, t, &self)?;
                self.vertical.push(v);
            }
        }
        self.vertical.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(self)
    }

    pub fn vertical_at(&self, t: f64) -> Option<&VerticalMass> {
        self.vertical.iter().find(|v| v.t == t)
    }

    fn check(&self, form: &Eigenform) -> Result<()> {
        if self.weight != form.weight() {
            return Err(Error::WeightMismatch(self.weight, form.weight()));
        }
        if self.index != form.index() {
            return Err(Error::Domain(format!(
                "profile is for form {} but form {} was given",
                self.index,
                form.index()
            )));
        }
        Ok(())
    }
}

/// Computes the norm at split height `y_split` and builds the profile.
pub fn mass_profile(form: &Eigenform, y_split: f64, quad_tol: f64) -> Result<MassProfile> {
    let norm = petersson_norm_sq(form, y_split, quad_tol)?;
    MassProfile::from_norm(form, norm, y_split, quad_tol)
}

/// `2 pi^2 / ((k-1) L)`, turning `sum lambda^2 Q` into normalized mass.
fn mass_prefactor(k: u32, l: &Float) -> LogReal {
    let prec = l.prec();
    let pi = Float::with_val(prec, Constant::Pi);
    let num = Float::with_val(prec, pi.square_ref()) * 2u32;
    let den = Float::with_val(prec, l * (k - 1));
    LogReal::from_float(&Float::with_val(prec, num / den))
}

/// Normalized prefactor for a pair: `2 pi^2 / ((k-1) sqrt(L1 L2))`.
fn pair_prefactor(k: u32, l1: &Float, l2: &Float) -> LogReal {
    if l1 == l2 {
        return mass_prefactor(k, l1);
    }
    let prec = l1.prec().min(l2.prec());
    let g = Float::with_val(prec, l1 * l2).sqrt();
    mass_prefactor(k, &g)
}

fn require_coeffs(form: &Eigenform, need: usize) -> Result<()> {
    if form.ncoeffs() < need {
        return Err(Error::InsufficientCoeffs {
            have: form.ncoeffs(),
            need,
        });
    }
    Ok(())
}

fn q_at(k: u32, x: &Float) -> Result<LogReal> {
    Ok(reg_inc_gamma_q(u64::from(k - 1), x)?.log)
}

/// `sum_{n <= count} lambda(n)^2 Q(k-1, 4 pi n T)`.
fn strip_sum(form: &Eigenform, t: f64, count: usize) -> Result<LogReal> {
    let prec = form.precision_bits();
    let k = form.weight();
    let four_pi_t = Float::with_val(prec, Constant::Pi) * 4u32 * t;
    let mut acc = LogSum::new(prec);
    for n in 1..=count {
        let q = q_at(k, &Float::with_val(prec, &four_pi_t * n as u32))?;
        let l2 = Float::with_val(prec, form.lambda(n).expect("checked").square_ref());
        acc.push(&LogReal::from_float(&l2).mul(&q));
    }
    Ok(acc.total())
}

/// `I_k(T)` by both the reduced and the raw formula.
pub fn vertical_mass(form: &Eigenform, t: f64, profile: &MassProfile) -> Result<VerticalMass> {
    profile.check(form)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("vertical mass needs T > 0, got {t}")));
    }
    let k = form.weight();
    let prec = form.precision_bits();
    let n_star = strip_ncoeffs(k, t)?;
    require_coeffs(form, n_star)?;
    let sum = strip_sum(form, t, n_star)?;
    let pref = mass_prefactor(k, &profile.sym2.l);
    let raw_pref = quadrature::strip_prefactor(k, prec).div(&profile.log_norm_sq);
    let tail = pref.mul(&truncation_tail_bound(k, t, n_star as u64)?);
    Ok(VerticalMass {
        t,
        value: pref.mul(&sum),
        raw: raw_pref.mul(&sum),
        n_star,
        tail,
    })
}

/// Result of a rectangle mass.
#[derive(Clone, Debug)]
pub struct RectMass {
    /// Normalized mass `mu_k(R)`.
    pub value: LogReal,
    /// Bound on band and truncation error, normalized.
    pub error: LogReal,
    pub n_star: usize,
    /// Off-diagonal band half-width; 0 when the rectangle is a full period.
    pub band: usize,
}

impl RectMass {
    pub fn to_f64(&self) -> Result<f64> {
        self.value.to_f64()
    }
}

/// Normalized cross mass `<psi f1, f2> / (||f1|| ||f2||)`.
#[derive(Clone, Debug)]
pub struct CrossMass {
    /// Real part of the unnormalized value.
    pub value: LogReal,
    pub re: LogReal,
    pub im: LogReal,
    pub error: LogReal,
    pub n_star: usize,
    pub band: usize,
}

impl CrossMass {
    /// `|normalized value|` as a double.
    pub fn modulus(&self) -> Result<f64> {
        Ok(self.re.to_f64()?.hypot(self.im.to_f64()?))
    }
}

/// Raw pair sum `sum lambda1(n) lambda2(m) X_{nm} w_{nm} [Q(t1) - Q(t2)]`
/// split into real and imaginary parts.
struct PairSum {
    re: LogReal,
    im: LogReal,
    band: usize,
    /// Bound on `|re|` and `|im|` contributions with `|n - m| > band`.
    band_rem: LogReal,
}

/// Log of `w_{nm} = (2 sqrt(nm) / (n+m))^{k-1}`.
fn log_weight(k: u32, n: usize, m: usize, prec: u32) -> Float {
    let (nf, mf) = (Float::with_val(prec, n), Float::with_val(prec, m));
    let gm = Float::with_val(prec, &nf * &mf).sqrt() * 2u32;
    Float::with_val(prec, gm / Float::with_val(prec, n + m)).ln() * (k - 1)
}

/// `(Re X_j, Im X_j)` for `int_a^b e^{2 pi i j x} dx`, `j >= 1`.
fn char_integral(j: usize, a: f64, b: f64, prec: u32) -> (Float, Float) {
    let two_pi_j = Float::with_val(prec, Constant::Pi) * 2u32 * j as u32;
    let (sa, ca) = Float::with_val(prec, &two_pi_j * a).sin_cos(Float::new(prec));
    let (sb, cb) = Float::with_val(prec, &two_pi_j * b).sin_cos(Float::new(prec));
    let re = Float::with_val(prec, &sb - &sa) / &two_pi_j;
    let im = Float::with_val(prec, &ca - &cb) / &two_pi_j;
    (re, im)
}

fn pair_sum(f1: &Eigenform, f2: &Eigenform, r: &Rectangle, count: usize) -> Result<PairSum> {
    let prec = f1.precision_bits().min(f2.precision_bits());
    let k = f1.weight();
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    // Q differences indexed by s = n + m.
    let dq: Vec<LogReal> = (0..=2 * count)
        .into_par_iter()
        .map(|s| -> Result<LogReal> {
            if s < 2 {
                return Ok(LogReal::zero(prec));
            }
            let x1 = Float::with_val(prec, &two_pi * s as u32) * r.t1();
            let q1 = q_at(k, &x1)?;
            match r.t2() {
                None => Ok(q1),
                Some(t2) => {
                    let x2 = Float::with_val(prec, &two_pi * s as u32) * t2;
                    Ok(q1.sub(&q_at(k, &x2)?))
                }
            }
        })
        .collect::<Result<_>>()?;
    let width = LogReal::from_float(&Float::with_val(prec, r.width()));
    let lam1: Vec<&Float> = (1..=count).map(|n| f1.lambda(n).expect("checked")).collect();
    let lam2: Vec<&Float> = (1..=count).map(|n| f2.lambda(n).expect("checked")).collect();

    let mut re = LogSum::new(prec);
    let mut diag_abs = LogSum::new(prec);
    for n in 1..=count {
        let c = Float::with_val(prec, lam1[n - 1] * lam2[n - 1]);
        let term = LogReal::from_float(&c).mul(&width).mul(&dq[2 * n]);
        diag_abs.push(&term.abs());
        re.push(&term);
    }
    let diag_abs = diag_abs.total();
    let mut im = LogSum::new(prec);
    if r.is_full_width() || count < 2 {
        return Ok(PairSum {
            re: re.total(),
            im: im.total(),
            band: 0,
            band_rem: LogReal::zero(prec),
        });
    }

    // Per-pair magnitudes in f64 logs for the band remainder.
    let lnlam = |l: &Float| if l.is_zero() { f64::NEG_INFINITY } else { l.to_f64().abs().ln() };
    let ln1: Vec<f64> = lam1.iter().map(|l| lnlam(l)).collect();
    let ln2: Vec<f64> = lam2.iter().map(|l| lnlam(l)).collect();
    let lndq: Vec<f64> = dq
        .iter()
        .map(|q| if q.is_zero() { f64::NEG_INFINITY } else { q.logmag().to_f64() })
        .collect();
    let kf = f64::from(k);
    let remainder = |band: usize| -> f64 {
        let mut terms = Vec::new();
        for n in 1..=count {
            for m in 1..n.saturating_sub(band) {
                let j = (n - m) as f64;
                let x = r.width().min(1.0 / (std::f64::consts::PI * j)).ln();
                let w = (kf - 1.0) * ((2.0 * ((n * m) as f64).sqrt()) / (n + m) as f64).ln();
                let c = (ln1[n - 1] + ln2[m - 1]).max(ln1[m - 1] + ln2[n - 1]) + std::f64::consts::LN_2;
                terms.push(c + x + w + lndq[n + m]);
            }
        }
        let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if mx == f64::NEG_INFINITY {
            return mx;
        }
        mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln()
    };
    let target = diag_abs.logmag().to_f64() - BAND_REL_BITS * std::f64::consts::LN_2;
    let mut band = (kf.ln().ceil() as usize).max(1);
    let mut rem = remainder(band);
    while rem > target && band < count - 1 {
        band = (2 * band).min(count - 1);
        rem = remainder(band);
    }
    let band_rem = if rem == f64::NEG_INFINITY {
        LogReal::zero(prec)
    } else {
        LogReal::exp(Float::with_val(prec, rem))
    };

    let chars: Vec<(Float, Float)> = (1..=band).map(|j| char_integral(j, r.a(), r.b(), prec)).collect();
    let rows: Vec<(LogSum, LogSum)> = (2..=count)
        .into_par_iter()
        .map(|n| {
            let mut rs = LogSum::new(prec);
            let mut is = LogSum::new(prec);
            for m in n.saturating_sub(band).max(1)..n {
                let (xr, xi) = &chars[n - m - 1];
                let lw = LogReal::exp(log_weight(k, n, m, prec)).mul(&dq[n + m]);
                let a = Float::with_val(prec, lam1[n - 1] * lam2[m - 1]);
                let b = Float::with_val(prec, lam1[m - 1] * lam2[n - 1]);
                let cre = Float::with_val(prec, &a + &b) * xr;
                let cim = Float::with_val(prec, &a - &b) * xi;
                rs.push(&LogReal::from_float(&cre).mul(&lw));
                is.push(&LogReal::from_float(&cim).mul(&lw));
            }
            (rs, is)
        })
        .collect();
    for (rs, is) in rows {
        re.extend(rs);
        im.extend(is);
    }
    Ok(PairSum {
        re: re.total(),
        im: im.total(),
        band,
        band_rem,
    })
}

/// Terms needed on a rectangle with lower edge `t1`, and the certified tail
/// `sum_{n > N} lambda^2 Q(k-1, 4 pi n t1)`.
fn rect_truncation(k: u32, t1: f64) -> Result<(usize, LogReal)> {
    let n = strip_ncoeffs(k, t1)?;
    Ok((n, truncation_tail_bound(k, t1, n as u64)?))
}

/// `mu_k(R)`: normalized mass of `y^k |f|^2 dx dy / y^2` over `R`.
pub fn rect_mass(form: &Eigenform, r: &Rectangle, profile: &MassProfile) -> Result<RectMass> {
    profile.check(form)?;
    let k = form.weight();
    let prec = form.precision_bits();
    let (count, tail) = rect_truncation(k, r.t1())?;
    require_coeffs(form, count)?;
    let ps = pair_sum(form, form, r, count)?;
    let pref = mass_prefactor(k, &profile.sym2.l);
    let value = pref.mul(&ps.re);
    // |<psi F_N, F_tail>| <= sqrt(mu_N) sqrt(tail) by Cauchy-Schwarz.
    let tail_n = pref.mul(&tail);
    let strip = pref.mul(&strip_sum(form, r.t1(), count)?);
    let two = LogReal::from_f64(2.0, prec);
    let error = two.mul(&strip.mul(&tail_n).sqrt()).add(&tail_n).add(&two.mul(&pref.mul(&ps.band_rem)));
    let floor = LogReal::exp(Float::with_val(prec, -f64::from(NEGATIVE_MASS_BITS) * std::f64::consts::LN_2));
    if value.sign() < 0 && value.abs().cmp_value(&floor).is_gt() {
        return Err(Error::NegativeMass(value.to_f64().unwrap_or(f64::NEG_INFINITY)));
    }
    Ok(RectMass {
        value,
        error,
        n_star: count,
        band: ps.band,
    })
}

/// Siegel domain mass together with the cusp bound `e^{-2 pi T} / (2 pi T)`.
#[derive(Clone, Debug)]
pub struct SiegelMass {
    pub mass: RectMass,
    /// `ln mu_k`.
    pub log_mu: f64,
    /// `-2 pi T - ln(2 pi T)`.
    pub log_bound: f64,
    /// `T >= 4 k ln k`.
    pub in_hypothesis: bool,
    /// `log_bound - log_mu`; positive when the bound holds.
    pub slack: f64,
}

pub fn siegel_mass(form: &Eigenform, s: &SiegelDomain, profile: &MassProfile) -> Result<SiegelMass> {
    let mass = rect_mass(form, &s.to_rectangle(), profile)?;
    if mass.value.sign() <= 0 {
        return Err(Error::NegativeMass(0.0));
    }
    let log_mu = mass.value.logmag().to_f64();
    let two_pi_t = 2.0 * std::f64::consts::PI * s.t();
    let log_bound = -two_pi_t - two_pi_t.ln();
    let k = f64::from(form.weight());
    Ok(SiegelMass {
        log_mu,
        log_bound,
        in_hypothesis: s.t() >= 4.0 * k * k.ln(),
        slack: log_bound - log_mu,
        mass,
    })
}

/// Cross mass of two forms of equal weight over `R`.
pub fn cross_mass(
    f1: &Eigenform,
    f2: &Eigenform,
    r: &Rectangle,
    p1: &MassProfile,
    p2: &MassProfile,
) -> Result<CrossMass> {
    if f1.weight() != f2.weight() {
        return Err(Error::WeightMismatch(f1.weight(), f2.weight()));
    }
    p1.check(f1)?;
    p2.check(f2)?;
    let k = f1.weight();
    let prec = f1.precision_bits().min(f2.precision_bits());
    let (count, tail) = rect_truncation(k, r.t1())?;
    require_coeffs(f1, count)?;
    require_coeffs(f2, count)?;
    let ps = pair_sum(f1, f2, r, count)?;
    let pref = pair_prefactor(k, &p1.sym2.l, &p2.sym2.l);
    let p1n = mass_prefactor(k, &p1.sym2.l);
    let p2n = mass_prefactor(k, &p2.sym2.l);
    let (t1, t2) = (p1n.mul(&tail), p2n.mul(&tail));
    let (s1, s2) = (p1n.mul(&strip_sum(f1, r.t1(), count)?), p2n.mul(&strip_sum(f2, r.t1(), count)?));
    let error = s1
        .mul(&t2)
        .sqrt()
        .add(&s2.mul(&t1).sqrt())
        .add(&t1.mul(&t2).sqrt())
        .add(&pref.mul(&ps.band_rem));
    let raw = quadrature::strip_prefactor(k, prec).mul(&ps.re);
    Ok(CrossMass {
        value: raw,
        re: pref.mul(&ps.re),
        im: pref.mul(&ps.im),
        error,
        n_star: count,
        band: ps.band,
    })
}

/// Mass of `F = sum alpha_i f_i` over `R`.
#[derive(Clone, Debug)]
pub struct AdmissibleMass {
    pub value: f64,
    pub imag_residue: f64,
}

pub fn admissible_mass(
    coeffs: &[Complex64],
    basis: &EigenBasis,
    profiles: &[MassProfile],
    r: &Rectangle,
) -> Result<AdmissibleMass> {
    let d = basis.dim();
    if coeffs.len() != d || profiles.len() != d {
        return Err(Error::Domain(format!(
            "expected {d} coefficients and profiles, got {} and {}",
            coeffs.len(),
            profiles.len()
        )));
    }
    if coeffs.iter().all(|c| c.norm_sqr() == 0.0) {
        return Err(Error::AllZeroCoeffs);
    }
    let forms = basis.forms();
    // Norms relative to the largest, to stay in double range.
    let logs: Vec<f64> = profiles.iter().map(|p| p.log_norm_sq.logmag().to_f64() / 2.0).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norms: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let active: Vec<usize> = (0..d).filter(|&i| coeffs[i].norm_sqr() > 0.0).collect();
    let mut num = Complex64::new(0.0, 0.0);
    for &i in &active {
        for &l in &active {
            let c = cross_mass(&forms[i], &forms[l], r, &profiles[i], &profiles[l])?;
            let cil = Complex64::new(c.re.to_f64()?, c.im.to_f64()?);
            num += coeffs[i] * coeffs[l].conj() * cil * norms[i] * norms[l];
        }
    }
    let den: f64 = active.iter().map(|&i| coeffs[i].norm_sqr() * norms[i] * norms[i]).sum();
    let value = num / den;
    let bound = 2f64.powi(-IMAG_RESIDUE_BITS);
    if value.im.abs() > bound.max(f64::EPSILON * 16.0 * value.re.abs()) {
        return Err(Error::Domain(format!("admissible mass has imaginary part {}", value.im)));
    }
    Ok(AdmissibleMass {
        value: value.re,
        imag_residue: value.im,
    })
}

/// `I_k(T) = M_k(T) + E_k(T)` cut at `n_c = (k + k^{1/2+delta}) / (4 pi T)`.
#[derive(Clone, Debug)]
pub struct MainErrorSplit {
    pub n_cut: usize,
    pub main: LogReal,
    pub error: LogReal,
    pub total: LogReal,
    /// Deligne-majorant upper bound for `E_k(T)`.
    pub certificate: LogReal,
}

pub fn main_error_split(form: &Eigenform, t: f64, delta: f64, profile: &MassProfile) -> Result<MainErrorSplit> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Domain(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    let v = vertical_mass(form, t, profile)?;
    let k = form.weight();
    let kf = f64::from(k);
    let prec = form.precision_bits();
    let n_cut = ((kf + kf.powf(0.5 + delta)) / (4.0 * std::f64::consts::PI * t)).floor() as usize;
    let pref = mass_prefactor(k, &profile.sym2.l);
    let four_pi_t = Float::with_val(prec, Constant::Pi) * 4u32 * t;
    let (mut main, mut err) = (LogSum::new(prec), LogSum::new(prec));
    for n in 1..=v.n_star {
        let q = q_at(k, &Float::with_val(prec, &four_pi_t * n as u32))?;
        let l2 = Float::with_val(prec, form.lambda(n).expect("checked").square_ref());
        let term = LogReal::from_float(&l2).mul(&q);
        if n <= n_cut {
            main.push(&term);
        } else {
            err.push(&term);
        }
    }
    let (main, error) = (pref.mul(&main.total()), pref.mul(&err.total()));
    // Certificate: d(n)^2 Q terms up to where the tail majorant is valid.
    let valid_from = ((kf - 2.0) / (4.0 * std::f64::consts::PI * t)).ceil() as usize;
    let n0 = n_cut.max(valid_from).max(1);
    let mut cert = LogSum::new(prec);
    for n in (n_cut + 1)..=n0 {
        let q = q_at(k, &Float::with_val(prec, &four_pi_t * n as u32))?;
        let d = divisor_count(n as u64);
        cert.push(&LogReal::from_float(&Float::with_val(prec, d * d)).mul(&q));
    }
    cert.push(&truncation_tail_bound(k, t, n0 as u64)?.rounded(prec));
    Ok(MainErrorSplit {
        n_cut,
        total: main.add(&error),
        main,
        error,
        certificate: pref.mul(&cert.total()),
    })
}

#[cfg(test)]
mod tests;
