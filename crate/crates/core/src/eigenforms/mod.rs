//! Normalized Hecke eigenforms of level one as high-precision coefficient
//! sequences `lambda(n) = a(n) n^{-(k-1)/2}`.

mod roots;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::qseries::{cusp_dim, hecke_matrix, victor_miller_basis, HeckeMatrix, IntPoly, VictorMillerBasis};

/// Smallest accepted working precision.
pub const MIN_PRECISION_BITS: u32 = 128;
/// Bits carried beyond the requested precision on top of the estimated
/// cancellation loss.
const GUARD_BITS: u32 = 64;
/// Extra bits of the reference solve used to measure coordinate accuracy.
const PROBE_BITS: u32 = 64;
/// Give up once the working precision exceeds this multiple of the estimate.
const MAX_WORKING_FACTOR: u32 = 16;

/// A normalized eigenform `f = sum a(n) q^n`, `a(1) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenform {
    weight: u32,
    index: usize,
    precision_bits: u32,
    t2_eigenvalue: Float,
    lambda: Vec<Float>,
}

impl Eigenform {
    /// Reassembles a form from stored parts (e.g. a cache entry).
    pub fn from_parts(
        weight: u32,
        index: usize,
        precision_bits: u32,
        t2_eigenvalue: Float,
        lambda: Vec<Float>,
    ) -> Result<Self> {
        if lambda.first().map_or(true, |l| *l != 1) {
            return Err(Error::Domain("stored form must have lambda(1) = 1".into()));
        }
        if index == 0 {
            return Err(Error::Domain("form indices start at 1".into()));
        }
        Ok(Eigenform {
            weight,
            index,
            precision_bits,
            t2_eigenvalue,
            lambda,
        })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// Position (from 1) in ascending order of the `T_2` eigenvalue.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn ncoeffs(&self) -> usize {
        self.lambda.len()
    }

    /// Eigenvalue of `T_2`, which is `a(2)`.
    pub fn t2_eigenvalue(&self) -> &Float {
        &self.t2_eigenvalue
    }

    /// `lambda(n)` for `1 <= n <= ncoeffs`.
    pub fn lambda(&self, n: usize) -> Option<&Float> {
        n.checked_sub(1).and_then(|i| self.lambda.get(i))
    }

    /// `lambda(1..=ncoeffs)`.
    pub fn lambdas(&self) -> &[Float] {
        &self.lambda
    }

    /// Copy truncated to the first `n` coefficients.
    pub fn truncated(&self, n: usize) -> Eigenform {
        let mut f = self.clone();
        f.lambda.truncate(n.max(1));
        f
    }

    fn require(&self, n: usize) -> Result<()> {
        if n > self.ncoeffs() {
            return Err(Error::InsufficientCoeffs {
                have: self.ncoeffs(),
                need: n,
            });
        }
        Ok(())
    }
}

/// All normalized eigenforms of one weight, ordered by `T_2` eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenBasis {
    weight: u32,
    charpoly: IntPoly,
    forms: Vec<Eigenform>,
}

impl EigenBasis {
    pub fn from_parts(weight: u32, charpoly: IntPoly, forms: Vec<Eigenform>) -> Result<Self> {
        let d = cusp_dim(weight)?;
        if forms.len() != d || charpoly.degree() != Some(d) {
            return Err(Error::Domain(format!("weight {weight}: expected {d} forms")));
        }
        if forms.iter().any(|f| f.weight != weight) {
            return Err(Error::Domain("stored forms disagree on the weight".into()));
        }
        Ok(EigenBasis { weight, charpoly, forms })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.forms.len()
    }

    /// Exact characteristic polynomial of `T_2` on `S_k`.
    pub fn charpoly(&self) -> &IntPoly {
        &self.charpoly
    }

    pub fn forms(&self) -> &[Eigenform] {
        &self.forms
    }

    /// Form by its 1-based index.
    pub fn form(&self, index: usize) -> Option<&Eigenform> {
        index.checked_sub(1).and_then(|i| self.forms.get(i))
    }

    pub fn ncoeffs(&self) -> usize {
        self.forms.iter().map(Eigenform::ncoeffs).min().unwrap_or(0)
    }

    pub fn precision_bits(&self) -> u32 {
        self.forms.first().map_or(0, Eigenform::precision_bits)
    }
}

/// Number of divisors of `n`.
pub fn divisor_count(mut n: u64) -> u64 {
    assert!(n > 0);
    let mut count = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        count *= e + 1;
        p += 1;
    }
    if n > 1 {
        count *= 2;
    }
    count
}

/// Prime factorization by trial division, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Roots of the `T_2` characteristic polynomial at `wp` bits and the
/// normalized coordinates of the matching eigenvectors.
fn eigen_coords(
    t2: &HeckeMatrix,
    charpoly: &IntPoly,
    iso: &roots::Isolation,
    wp: u32,
    precision_bits: u32,
    k: u32,
) -> Result<(Vec<Float>, Vec<Vec<Float>>)> {
    let roots = iso.polish(charpoly, wp);
    let sep = Float::with_val(wp, Float::i_exp(1, -((precision_bits / 2) as i32)));
    if roots.windows(2).any(|w| Float::with_val(wp, &w[1] - &w[0]) <= sep) {
        return Err(Error::DegenerateSpectrum { k, bits: precision_bits / 2 });
    }
    let m: Vec<Vec<Float>> = t2
        .rows()
        .iter()
        .map(|r| r.iter().map(|v| Float::with_val(wp, v)).collect())
        .collect();
    let coords = roots.par_iter().map(|mu| normalize_coords(&null_vector(&m, mu))).collect();
    Ok((roots, coords))
}

/// `log2` of the Deligne bound `d(i) i^{(k-1)/2}` on the coordinate `c_i = a(i)`.
fn coord_bounds(k: u32, d: usize) -> Vec<f64> {
    let half = (f64::from(k) - 1.0) / 2.0;
    (1..=d)
        .map(|i| (divisor_count(i as u64) as f64).log2() + half * (i as f64).log2())
        .collect()
}

/// Largest `log2 |lo_i - hi_i|` relative to the coordinate bounds.
fn coord_error_bits(lo: &[Vec<Float>], hi: &[Vec<Float>], bounds: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (a, b) in lo.iter().zip(hi) {
        for ((x, y), lb) in a.iter().zip(b).zip(bounds) {
            let diff = Float::with_val(y.prec(), x - y);
            if !diff.is_zero() {
                let e = diff.abs().log2().to_f64();
                worst = worst.max(e - lb);
            }
        }
    }
    worst
}

/// Bits lost to cancellation when forming `a(n) = sum c_i g_i(n)`, estimated
/// from the basis coefficient sizes and Deligne's bound for `c_i = a(i)`.
fn cancellation_bits(basis: &VictorMillerBasis, ncoeffs: usize) -> u32 {
    let k = f64::from(basis.weight());
    let half = (k - 1.0) / 2.0;
    let cbound = coord_bounds(basis.weight(), basis.dim());
    let mut loss = 0.0f64;
    for n in 1..=ncoeffs {
        let size = half * (n as f64).log2();
        for (g, cb) in basis.basis().iter().zip(&cbound) {
            let c = g.coeff(n);
            if *c != 0 {
                loss = loss.max(f64::from(c.significant_bits()) + cb - size);
            }
        }
    }
    loss.ceil() as u32
}

/// Null vector of `M - mu I` by Gaussian elimination with complete pivoting.
fn null_vector(m: &[Vec<Float>], mu: &Float) -> Vec<Float> {
    let d = m.len();
    let prec = mu.prec();
    let mut a: Vec<Vec<Float>> = m.to_vec();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= mu;
    }
    let mut perm: Vec<usize> = (0..d).collect();
    for s in 0..d.saturating_sub(1) {
        let (mut pi, mut pj) = (s, s);
        let mut best = Float::new(prec);
        for (i, row) in a.iter().enumerate().skip(s) {
            for (j, v) in row.iter().enumerate().skip(s) {
                let av = Float::with_val(prec, v.abs_ref());
                if av > best {
                    best = av;
                    (pi, pj) = (i, j);
                }
            }
        }
        a.swap(s, pi);
        for row in a.iter_mut() {
            row.swap(s, pj);
        }
        perm.swap(s, pj);
        let pivot = a[s][s].clone();
        for i in (s + 1)..d {
            let f = Float::with_val(prec, &a[i][s] / &pivot);
            for j in s..d {
                let t = Float::with_val(prec, &f * &a[s][j]);
                a[i][j] -= t;
            }
        }
    }
    let mut y = vec![Float::new(prec); d];
    y[d - 1] = Float::with_val(prec, 1u32);
    for s in (0..d.saturating_sub(1)).rev() {
        let mut acc = Float::new(prec);
        for j in (s + 1)..d {
            acc += Float::with_val(prec, &a[s][j] * &y[j]);
        }
        y[s] = -acc / &a[s][s];
    }
    let mut c = vec![Float::new(prec); d];
    for (j, v) in y.into_iter().enumerate() {
        c[perm[j]] = v;
    }
    c
}

/// Scales echelon coordinates so that `a(1) = c_1 = 1`.
fn normalize_coords(c: &[Float]) -> Vec<Float> {
    let lead = c[0].clone();
    assert!(!lead.is_zero(), "an eigenform has a(1) != 0");
    c.iter().map(|v| Float::with_val(v.prec(), v / &lead)).collect()
}

/// `lambda(1..=ncoeffs)` from normalized coordinates at working precision,
/// rounded to `precision_bits`.
fn lambdas_from_coords(basis: &VictorMillerBasis, c: &[Float], ncoeffs: usize, precision_bits: u32) -> Vec<Float> {
    let k = basis.weight();
    let wp = c[0].prec();
    (1..=ncoeffs)
        .into_par_iter()
        .map(|n| {
            let mut a = Float::new(wp);
            for (g, ci) in basis.basis().iter().zip(c) {
                a += Float::with_val(wp, ci * g.coeff(n));
            }
            // n^{(k-1)/2} = n^{(k-2)/2} sqrt(n), k even
            let scale = Float::with_val(wp, Integer::from(n).pow((k - 2) / 2)) * Float::with_val(wp, n).sqrt();
            Float::with_val(precision_bits, a / scale)
        })
        .collect()
}

/// Decomposes `S_k` into normalized Hecke eigenforms with `ncoeffs`
/// coefficients each, accurate to `precision_bits`.
pub fn eigen_decompose(k: u32, ncoeffs: usize, precision_bits: u32) -> Result<EigenBasis> {
    let d = cusp_dim(k)?;
    if d == 0 {
        return Err(Error::DimensionZero(k));
    }
    let order = ncoeffs.max(2 * d + 2);
    let basis = victor_miller_basis(k, order)?;
    eigen_decompose_basis(&basis, ncoeffs, precision_bits)
}

/// As [`eigen_decompose`], from an already constructed Miller basis.
pub fn eigen_decompose_basis(basis: &VictorMillerBasis, ncoeffs: usize, precision_bits: u32) -> Result<EigenBasis> {
    let k = basis.weight();
    let d = basis.dim();
    if ncoeffs < 2 {
        return Err(Error::InsufficientCoeffs { have: ncoeffs, need: 2 });
    }
    if precision_bits < MIN_PRECISION_BITS {
        return Err(Error::Domain(format!(
            "precision {precision_bits} below the minimum {MIN_PRECISION_BITS}"
        )));
    }
    if basis.order() < ncoeffs {
        return Err(Error::InsufficientOrder {
            have: basis.order(),
            need: ncoeffs,
        });
    }
    let t2 = hecke_matrix(2, basis)?;
    let charpoly = t2.charpoly();
    let g = charpoly.gcd(&charpoly.derivative());
    if g.degree() != Some(0) {
        return Err(Error::DegenerateSpectrum { k, bits: precision_bits });
    }
    let iso = roots::isolate(&charpoly, 32);
    if iso.real_roots != d {
        return Err(Error::ComplexRoot {
            k,
            real: iso.real_roots,
            degree: d,
        });
    }
    // Coordinates come from a null vector of T_2 - mu in the Miller basis,
    // whose conditioning worsens with the weight. Solve at two precisions and
    // raise the working precision until they agree to the target.
    let base = precision_bits + GUARD_BITS + cancellation_bits(basis, ncoeffs);
    let bounds = coord_bounds(basis.weight(), d);
    let mut wp = base;
    let (roots, coords) = loop {
        let (_, lo) = eigen_coords(&t2, &charpoly, &iso, wp, precision_bits, k)?;
        let (roots, hi) = eigen_coords(&t2, &charpoly, &iso, wp + PROBE_BITS, precision_bits, k)?;
        let err = coord_error_bits(&lo, &hi, &bounds);
        if err <= -f64::from(base) {
            break (roots, hi);
        }
        wp += (err + f64::from(base)).ceil() as u32 + PROBE_BITS;
        if wp > MAX_WORKING_FACTOR * base {
            return Err(Error::DegenerateSpectrum { k, bits: precision_bits });
        }
    };
    let forms = roots
        .par_iter()
        .zip(coords.par_iter())
        .enumerate()
        .map(|(i, (mu, c))| Eigenform {
            weight: k,
            index: i + 1,
            precision_bits,
            t2_eigenvalue: Float::with_val(precision_bits, mu),
            lambda: lambdas_from_coords(basis, c, ncoeffs, precision_bits),
        })
        .collect();
    Ok(EigenBasis { weight: k, charpoly, forms })
}

/// `lambda(n)` rebuilt from `lambda(p)` at the primes dividing `n`, using
/// `lambda(p^{r+1}) = lambda(p) lambda(p^r) - lambda(p^{r-1})` and
/// multiplicativity.
pub fn lambda_extend_by_hecke(form: &Eigenform, n: u64) -> Result<Float> {
    if n == 0 {
        return Err(Error::Domain("lambda(0) is undefined".into()));
    }
    let prec = form.precision_bits;
    let mut out = Float::with_val(prec, 1u32);
    for (p, e) in factorize(n) {
        let lp = form.lambda(p as usize).ok_or(Error::MissingPrime(p))?;
        let (mut prev, mut cur) = (Float::with_val(prec, 1u32), lp.clone());
        for _ in 1..e {
            let next = Float::with_val(prec, lp * &cur) - &prev;
            prev = cur;
            cur = next;
        }
        out *= cur;
    }
    Ok(out)
}

/// Outcome of scanning `|lambda(n)| / d(n)` against Deligne's bound.
#[derive(Clone, Debug, PartialEq)]
pub struct DeligneReport {
    pub n_max: usize,
    /// `max_n |lambda(n)| / d(n)`.
    pub max_ratio: f64,
    /// Where the maximum is attained.
    pub argmax: usize,
    /// `max_{n >= 2} |lambda(n)| n^{-0.1}`, the slack left for an
    /// `n^epsilon`-type bound.
    pub max_eps_scaled: f64,
    pub pass: bool,
}

/// Scans `n <= n_max`; passes iff every ratio is at most
/// `1 + 2^{-precision_bits/2}`.
pub fn deligne_check(form: &Eigenform, n_max: usize) -> Result<DeligneReport> {
    form.require(n_max)?;
    let prec = form.precision_bits;
    let limit = Float::with_val(prec, 1u32) + Float::with_val(prec, Float::i_exp(1, -((prec / 2) as i32)));
    let mut best = Float::new(prec);
    let mut argmax = 1;
    let mut eps_scaled = 0.0f64;
    let mut pass = true;
    for n in 1..=n_max {
        let l = form.lambda(n).expect("checked");
        let r = Float::with_val(prec, l.abs_ref()) / divisor_count(n as u64);
        if r > limit {
            pass = false;
        }
        if r > best {
            best = r;
            argmax = n;
        }
        if n >= 2 {
            eps_scaled = eps_scaled.max(l.to_f64().abs() * (n as f64).powf(-0.1));
        }
    }
    Ok(DeligneReport {
        n_max,
        max_ratio: best.to_f64(),
        argmax,
        max_eps_scaled: eps_scaled,
        pass,
    })
}
