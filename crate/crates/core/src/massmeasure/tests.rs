use std::sync::OnceLock;

use rug::ops::Pow;

use super::*;
use crate::eigenforms::eigen_decompose;

const P: u32 = 256;
const N: usize = 120;

fn delta() -> &'static (EigenBasis, MassProfile) {
    static D: OnceLock<(EigenBasis, MassProfile)> = OnceLock::new();
    D.get_or_init(|| {
        let b = eigen_decompose(12, N, P).unwrap();
        let p = mass_profile(&b.forms()[0], 2.0, 1e-10).unwrap();
        (b, p)
    })
}

fn k24() -> &'static (EigenBasis, Vec<MassProfile>) {
    static D: OnceLock<(EigenBasis, Vec<MassProfile>)> = OnceLock::new();
    D.get_or_init(|| {
        let b = eigen_decompose(24, N, P).unwrap();
        let p = b.forms().iter().map(|f| mass_profile(f, 2.0, 1e-10).unwrap()).collect();
        (b, p)
    })
}

fn f(x: &LogReal) -> f64 {
    x.to_f64().unwrap()
}

fn rel(a: &LogReal, b: &LogReal) -> f64 {
    f(&a.sub(b)).abs() / f(b).abs()
}

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

#[test]
fn delta_norm_matches_known_value() {
    let (_, p) = delta();
    // <Delta, Delta> = 1.03536205680432092e-6
    let v = f(&p.log_norm_sq);
    assert!((v / 1.035_362_056_804_320_9e-6 - 1.0).abs() < 1e-9, "{v}");
}

#[test]
fn norm_is_split_independent() {
    let (b, _) = delta();
    let form = &b.forms()[0];
    let tol = 1e-10;
    let vals: Vec<LogReal> = [1.5, 2.0, 3.0].iter().map(|&y| petersson_norm_sq(form, y, tol).unwrap()).collect();
    for v in &vals[1..] {
        assert!(rel(v, &vals[0]) < 1e-9);
    }
    let parts = petersson_norm_parts(form, 1.5, tol).unwrap();
    let parts3 = petersson_norm_parts(form, 3.0, tol).unwrap();
    assert!(f(&parts.region) < f(&parts3.region));
    assert!(f(&parts.strip) > f(&parts3.strip));
}

#[test]
fn norm_rejects_bad_inputs() {
    let (b, _) = delta();
    let form = &b.forms()[0];
    assert!(petersson_norm_sq(form, 0.5, 1e-8).is_err());
    assert!(petersson_norm_sq(form, 2.0, 0.0).is_err());
    let short = form.truncated(3);
    assert!(matches!(petersson_norm_sq(&short, 2.0, 1e-8), Err(Error::InsufficientCoeffs { .. })));
}

#[test]
fn symmetric_square_bridge() {
    let (b, p) = delta();
    let form = &b.forms()[0];
    let norm = p.log_norm_sq.to_float().unwrap();
    let pi = Float::with_val(P, Constant::Pi);
    let four_pi_k = Float::with_val(P, Float::with_val(P, &pi * 4u32).pow(12u32));
    let fact = Float::with_val(P, rug::Integer::from(rug::Integer::factorial(11)));
    let l = Float::with_val(P, &norm * &pi) / 2u32 * four_pi_k / fact;
    let s = sym2_l_value(form, &p.log_norm_sq).unwrap();
    assert!(Float::with_val(P, &s.l - &l).abs() < Float::with_val(P, Float::i_exp(1, -240)) * &l);
    let zeta2 = Float::with_val(P, pi.square_ref()) / 6u32;
    let r = Float::with_val(P, &s.r * &zeta2);
    assert!(Float::with_val(P, &r - &s.l).abs() < Float::with_val(P, Float::i_exp(1, -240)) * &l);
    assert!(s.l > 0);
}

#[test]
fn sym2_is_precision_stable() {
    let lo = eigen_decompose(12, N, 128).unwrap();
    let hi = eigen_decompose(12, N, 256).unwrap();
    let nl = petersson_norm_sq(&lo.forms()[0], 2.0, 1e-10).unwrap();
    let nh = petersson_norm_sq(&hi.forms()[0], 2.0, 1e-10).unwrap();
    let a = sym2_l_value(&lo.forms()[0], &nl).unwrap();
    let b = sym2_l_value(&hi.forms()[0], &nh).unwrap();
    let d = Float::with_val(256, &a.l - &b.l).abs();
    assert!(d < Float::with_val(256, Float::i_exp(1, -100)) * &b.l);
}

#[test]
fn vertical_paths_agree_and_decay() {
    let (b, p) = delta();
    let form = &b.forms()[0];
    let mut prev = f64::INFINITY;
    for t in [1.0, 1.5, 2.0, 5.0, 10.0] {
        let v = vertical_mass(form, t, p).unwrap();
        assert!(rel(&v.value, &v.raw) < pow2(-100));
        assert!(v.tail.logmag().to_f64() < v.value.logmag().to_f64() - 150.0);
        let x = f(&v.value);
        assert!(x > 0.0 && x < prev);
        prev = x;
    }
    let big = vertical_mass(form, 200.0, p).unwrap();
    assert!(big.value.logmag().to_f64() < -2000.0);
}

#[test]
fn profile_records_vertical_values() {
    let (b, p) = delta();
    let form = &b.forms()[0];
    let prof = p.clone().with_vertical(form, &[2.0, 1.0, 2.0]).unwrap();
    assert_eq!(prof.vertical.len(), 2);
    assert_eq!(prof.vertical[0].t, 1.0);
    assert!(prof.vertical_at(2.0).is_some());
    let (b24, _) = k24();
    assert!(vertical_mass(&b24.forms()[0], 1.0, p).is_err());
}

#[test]
fn full_width_rectangle_is_vertical_mass() {
    let (b, p) = delta();
    let form = &b.forms()[0];
    for t in [1.0, 2.5] {
        let r = rect_mass(form, &Rectangle::strip(t).unwrap(), p).unwrap();
        let v = vertical_mass(form, t, p).unwrap();
        assert!(rel(&r.value, &v.value) < pow2(-100));
        assert_eq!(r.band, 0);
    }
}

#[test]
fn rectangle_mass_is_additive_and_monotone() {
    let (b, p) = delta();
    let form = &b.forms()[0];
    let m = |a, bb, t1, t2| f(&rect_mass(form, &Rectangle::new(a, bb, t1, t2).unwrap(), p).unwrap().value);
    let whole = m(0.0, 0.5, 1.0, Some(2.0));
    let parts = m(0.0, 0.2, 1.0, Some(2.0)) + m(0.2, 0.5, 1.0, Some(2.0));
    assert!((whole - parts).abs() < pow2(-90).max(1e-15 * whole));
    let lower = m(0.0, 0.5, 1.0, Some(1.5)) + m(0.0, 0.5, 1.5, Some(2.0));
    assert!((whole - lower).abs() < 1e-15 * whole);
    let inner = m(0.1, 0.3, 1.2, Some(1.8));
    assert!(inner <= whole);
    assert!(whole <= m(-0.5, 0.5, 1.0, None));
}

#[test]
fn rectangle_mass_is_symmetric_in_x() {
    // Real coefficients: mu(a, b) = mu(-b, -a).
    let (b, p) = delta();
    let form = &b.forms()[0];
    let a = rect_mass(form, &Rectangle::new(0.1, 0.35, 1.0, None).unwrap(), p).unwrap();
    let c = rect_mass(form, &Rectangle::new(-0.35, -0.1, 1.0, None).unwrap(), p).unwrap();
    assert!(rel(&a.value, &c.value) < 1e-30);
    assert!(a.band >= 3);
}

#[test]
fn siegel_bound_for_delta() {
    let (b, p) = delta();
    let form = &b.forms()[0];
    let s = siegel_mass(form, &SiegelDomain::new(-0.5, 0.5, 120.0).unwrap(), p).unwrap();
    assert!(s.in_hypothesis);
    assert!(s.slack > 0.0);
    assert!(s.log_mu.is_finite());
    let low = siegel_mass(form, &SiegelDomain::new(-0.5, 0.5, 1.0).unwrap(), p).unwrap();
    assert!(!low.in_hypothesis);
}

#[test]
fn cross_mass_diagonal_is_rect_mass() {
    let (b, p) = delta();
    let form = &b.forms()[0];
    let r = Rectangle::new(0.0, 0.25, 1.0, Some(2.0)).unwrap();
    let c = cross_mass(form, form, &r, p, p).unwrap();
    let m = rect_mass(form, &r, p).unwrap();
    assert_eq!(c.re.sign(), m.value.sign());
    assert_eq!(c.re.logmag(), m.value.logmag());
    assert!(c.im.is_zero() || f(&c.im).abs() < pow2(-200));
}

#[test]
fn k24_forms_are_orthogonal() {
    let (b, ps) = k24();
    let (f1, f2) = (&b.forms()[0], &b.forms()[1]);
    let scale = ps[0].log_norm_sq.mul(&ps[1].log_norm_sq).sqrt();
    let inner = petersson_inner(f1, f2, 2.0, 1e-10, &scale).unwrap();
    let c = f(&inner.total.div(&scale)).abs();
    assert!(c < 1e-8, "normalized inner product {c}");

    let r = Rectangle::new(0.0, 0.25, 1.0, Some(2.0)).unwrap();
    let x = cross_mass(f1, f2, &r, &ps[0], &ps[1]).unwrap();
    let d1 = f(&rect_mass(f1, &r, &ps[0]).unwrap().value);
    let d2 = f(&rect_mass(f2, &r, &ps[1]).unwrap().value);
    assert!(x.modulus().unwrap() < d1.min(d2));
    // Closed-form cross mass over y > 1 against quadrature below y = 1.
    let low = petersson_inner(f1, f2, 1.0, 1e-10, &scale).unwrap();
    let strip = cross_mass(f1, f2, &Rectangle::strip(1.0).unwrap(), &ps[0], &ps[1]).unwrap();
    let below = f(&low.region.div(&scale));
    assert!((f(&strip.re) + below).abs() < 1e-8, "{} vs {below}", f(&strip.re));
    assert!(f(&strip.re).abs() > 1e-3);
    assert!(matches!(
        cross_mass(f1, &delta().0.forms()[0], &r, &ps[0], &delta().1),
        Err(Error::WeightMismatch(24, 12))
    ));
}

#[test]
fn admissible_mass_properties() {
    let (b, ps) = k24();
    let r = Rectangle::strip(1.0).unwrap();
    let one = admissible_mass(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], b, ps, &r).unwrap();
    let m1 = f(&rect_mass(&b.forms()[0], &r, &ps[0]).unwrap().value);
    assert!((one.value - m1).abs() < 1e-14 * m1);

    let alpha = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
    let mix = admissible_mass(&alpha, b, ps, &r).unwrap();
    let m2 = f(&rect_mass(&b.forms()[1], &r, &ps[1]).unwrap().value);
    // Expansion into diagonal and cross terms with norm weights.
    let (n1, n2) = (f(&ps[0].log_norm_sq), f(&ps[1].log_norm_sq));
    let c = f(&cross_mass(&b.forms()[0], &b.forms()[1], &r, &ps[0], &ps[1]).unwrap().re);
    let want = (n1 * m1 + n2 * m2 + 2.0 * c * (n1 * n2).sqrt()) / (n1 + n2);
    assert!((mix.value - want).abs() < 1e-13 * want);

    let rot = Complex64::from_polar(1.0, 0.7);
    let phased = admissible_mass(&[alpha[0] * rot, alpha[1] * rot], b, ps, &r).unwrap();
    assert!((phased.value - mix.value).abs() < 1e-14 * mix.value);

    // Each form has total mass 1 over the fundamental domain.
    let whole = |i: usize| {
        let p = petersson_norm_parts(&b.forms()[i], 1.0, 1e-10).unwrap();
        f(&p.total) / f(&ps[i].log_norm_sq)
    };
    let (w1, w2) = (whole(0), whole(1));
    assert!((w1 - 1.0).abs() < 1e-9 && (w2 - 1.0).abs() < 1e-9);

    let zero = [Complex64::new(0.0, 0.0); 2];
    assert!(matches!(admissible_mass(&zero, b, ps, &r), Err(Error::AllZeroCoeffs)));
}

#[test]
fn main_error_split_reconstructs_and_is_certified() {
    let (b, p) = delta();
    let form = &b.forms()[0];
    for t in [1.0, 10.0] {
        let s = main_error_split(form, t, 0.1, p).unwrap();
        let v = vertical_mass(form, t, p).unwrap();
        assert!(rel(&s.total, &v.value) < pow2(-100));
        assert!(s.error.cmp_value(&s.certificate).is_le());
    }
    assert!(main_error_split(form, 1.0, 0.5, p).is_err());
}

/// Direct double-precision evaluation of `y^k |f|^2` summed over all stored
/// coefficients.
fn density(form: &Eigenform, x: f64, y: f64) -> f64 {
    let k = f64::from(form.weight());
    let (mut re, mut im) = (0.0, 0.0);
    for (i, l) in form.lambdas().iter().enumerate() {
        let n = (i + 1) as f64;
        let a = l.to_f64() * ((k - 1.0) / 2.0 * n.ln() - 2.0 * std::f64::consts::PI * n * y + k / 2.0 * y.ln()).exp();
        let (s, c) = (2.0 * std::f64::consts::PI * n * x).sin_cos();
        re += a * c;
        im += a * s;
    }
    (re * re + im * im) / (y * y)
}

#[test]
fn rectangle_mass_matches_direct_quadrature() {
    let (b, ps) = k24();
    let q = quadrature::Adaptive {
        rel: 1e-11,
        abs_per_width: 0.0,
    };
    for (i, form) in b.forms().iter().enumerate() {
        let (a, bb, t1, t2) = (0.05, 0.3, 1.0, 2.5);
        let inner = |x: f64| Ok(q.integrate(&|y: f64| Ok(density(form, x, y)), t1, t2)?.0);
        let direct = q.integrate(&inner, a, bb).unwrap().0 / f(&ps[i].log_norm_sq);
        let r = rect_mass(form, &Rectangle::new(a, bb, t1, Some(t2)).unwrap(), &ps[i]).unwrap();
        assert!((f(&r.value) / direct - 1.0).abs() < 1e-9, "{} vs {direct}", f(&r.value));
    }
}
