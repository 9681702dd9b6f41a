use std::f64::consts::PI;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use super::lab::Lab;
use super::report::{dec, fx, trend_verdict, Row, ScenarioReport, Verdict};
use crate::eigenforms::deligne_check;
use crate::error::{Error, Result};
use crate::massmeasure::{
    cross_mass, main_error_split, rect_mass, siegel_mass, vertical_mass, Rectangle, SiegelDomain,
};
use crate::qseries::{cusp_dim, hecke_matrix, victor_miller_basis};
use crate::specfun::oracle::reg_inc_gamma_p_cf;
use crate::specfun::{gamma_lemma_argument, gamma_lemma_gap};

/// Largest `|rho - 1|` median on the top weights for a convention to count
/// as converging toward 1.
pub const MEAN_VALUE_GATE: f64 = 0.1;
/// `|cross| / min diagonal` allowed at the smallest weight of the
/// orthogonality grid.
pub const ORTHOGONALITY_GATE: f64 = 0.5;

const DIGITS: usize = 30;
const EXACT_BITS: i32 = 90;
const HARD_BITS: i32 = 100;

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// Runs `cell` for every weight in parallel and appends the rows in grid
/// order.
fn collect_rows<F>(report: &mut ScenarioReport, ks: &[u32], cell: F) -> Result<()>
where
    F: Fn(u32) -> Result<Vec<Row>> + Sync,
{
    let rows: Vec<Vec<Row>> = ks.par_iter().map(|&k| cell(k)).collect::<Result<_>>()?;
    report.rows.extend(rows.into_iter().flatten());
    Ok(())
}

fn points(report: &ScenarioReport, column: &str) -> Vec<(u32, f64)> {
    let v = report.column_f64(column).expect("numeric column");
    report.rows.iter().zip(v).map(|(r, x)| (r.k, x)).collect()
}

fn grid_param(report: &mut ScenarioReport, ks: &[u32]) {
    report.param("weights", format!("{ks:?}"));
}

/// `I_k(T) -> 3 / (pi T)`: table of `e_k = |I_k(T) pi T / 3 - 1|`.
pub fn run_vertical(lab: &Lab, ks: &[u32], t: f64) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new("vertical", &["I", "e_k"], ("k", "e_k"));
    grid_param(&mut report, ks);
    report.param("T", t);
    report.param("precision_bits", lab.precision_bits);
    report.tolerance("quad_tol", lab.quad_tol);
    collect_rows(&mut report, ks, |k| {
        let (basis, profiles) = lab.profiles(k, lab.mass_ncoeffs(k, t)?)?;
        basis
            .forms()
            .iter()
            .zip(profiles.iter())
            .map(|(f, p)| {
                let i = vertical_mass(f, t, p)?.value.to_float()?;
                let e = (i.to_f64() * PI * t / 3.0 - 1.0).abs();
                Ok(Row {
                    k,
                    index: f.index(),
                    values: vec![dec(&i, DIGITS), fx(e)],
                })
            })
            .collect()
    })?;
    let pts = points(&report, "e_k");
    report.verdict = trend_verdict(&mut report, "e_k", &pts);
    Ok(report)
}

/// `mu_k((a, b) x (T, inf)) / I_k(T) -> b - a`.
pub fn run_horizontal(lab: &Lab, ks: &[u32], a: f64, b: f64, t: f64) -> Result<ScenarioReport> {
    if !(-0.5..=0.5).contains(&a) || !(-0.5..=0.5).contains(&b) || a >= b {
        return Err(Error::InvalidRegion(format!("need -1/2 <= a < b <= 1/2, got {a}, {b}")));
    }
    let rect = Rectangle::new(a, b, t, None)?;
    let mut report = ScenarioReport::new("horizontal", &["mu", "I", "r_k", "dev"], ("k", "dev"));
    grid_param(&mut report, ks);
    report.param("a", a);
    report.param("b", b);
    report.param("T", t);
    report.param("precision_bits", lab.precision_bits);
    report.tolerance("quad_tol", lab.quad_tol);
    report.tolerance("exact", fx(pow2(-EXACT_BITS)));
    let width = b - a;
    collect_rows(&mut report, ks, |k| {
        let (basis, profiles) = lab.profiles(k, lab.mass_ncoeffs(k, t)?)?;
        basis
            .forms()
            .iter()
            .zip(profiles.iter())
            .map(|(f, p)| {
                let mu = rect_mass(f, &rect, p)?.value.to_float()?;
                let i = vertical_mass(f, t, p)?.value.to_float()?;
                let r = Float::with_val(mu.prec(), &mu / &i);
                let dev = (r.to_f64() - width).abs();
                Ok(Row {
                    k,
                    index: f.index(),
                    values: vec![dec(&mu, DIGITS), dec(&i, DIGITS), dec(&r, DIGITS), fx(dev)],
                })
            })
            .collect()
    })?;
    let pts = points(&report, "dev");
    report.verdict = if !pts.is_empty() && pts.iter().all(|p| p.1 <= pow2(-EXACT_BITS)) {
        report.note("dev_max", fx(pts.iter().map(|p| p.1).fold(0.0, f64::max)));
        Verdict::Pass
    } else {
        trend_verdict(&mut report, "dev", &pts)
    };
    Ok(report)
}

/// `log mu_k(S(-1/2, 1/2, T)) <= -2 pi T - ln(2 pi T)` for `T >= 4 k ln k`;
/// `t` overrides the default `T = ceil(4 k ln k)`.
pub fn run_siegel_bound(lab: &Lab, ks: &[u32], t: Option<f64>) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(
        "siegel",
        &["T", "log_mu", "log_bound", "slack", "in_hypothesis"],
        ("k", "slack"),
    );
    grid_param(&mut report, ks);
    report.param("T", t.map_or("ceil(4 k ln k)".to_string(), |t| t.to_string()));
    report.param("precision_bits", lab.precision_bits);
    collect_rows(&mut report, ks, |k| {
        let kf = f64::from(k);
        let t = t.unwrap_or((4.0 * kf * kf.ln()).ceil());
        let dom = SiegelDomain::new(-0.5, 0.5, t)?;
        let (basis, profiles) = lab.profiles(k, lab.mass_ncoeffs(k, t)?)?;
        basis
            .forms()
            .iter()
            .zip(profiles.iter())
            .map(|(f, p)| {
                let s = siegel_mass(f, &dom, p)?;
                Ok(Row {
                    k,
                    index: f.index(),
                    values: vec![
                        t.to_string(),
                        fx(s.log_mu),
                        fx(s.log_bound),
                        fx(s.slack),
                        s.in_hypothesis.to_string(),
                    ],
                })
            })
            .collect()
    })?;
    let slack = report.column("slack").expect("column");
    let hyp = report.column("in_hypothesis").expect("column");
    let mut checked = 0;
    let mut failures = Vec::new();
    for r in &report.rows {
        if r.values[hyp] != "true" {
            continue;
        }
        checked += 1;
        let s: f64 = r.values[slack].parse().expect("number");
        if !(s >= 0.0) {
            failures.push(format!("k = {}, form {}: slack {}", r.k, r.index, r.values[slack]));
        }
    }
    report.note("checked_rows", checked);
    report.note("out_of_hypothesis_rows", report.rows.len() - checked);
    report.failures.extend(failures);
    report.verdict = if !report.failures.is_empty() {
        Verdict::Fail
    } else if checked == 0 {
        Verdict::TrendOnly
    } else {
        Verdict::Pass
    };
    Ok(report)
}

/// `S = sum_{n <= eps k} lambda(n)^2` against `eps k L` and `eps k R`.
/// Weights with `eps k < 2` are skipped.
pub fn run_mean_values(lab: &Lab, ks: &[u32], eps: f64) -> Result<ScenarioReport> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let mut report = ScenarioReport::new(
        "meanvalues",
        &["m", "S", "L", "R", "rho_L", "rho_R"],
        ("k", "rho_R"),
    );
    grid_param(&mut report, ks);
    report.param("eps", eps);
    report.param("precision_bits", lab.precision_bits);
    report.tolerance("quad_tol", lab.quad_tol);
    report.tolerance("convergence_gate", MEAN_VALUE_GATE);
    let (used, skipped): (Vec<u32>, Vec<u32>) = ks.iter().partition(|&&k| eps * f64::from(k) >= 2.0);
    if used.is_empty() {
        return Err(Error::InsufficientRange(format!("eps k < 2 for every weight in {ks:?}")));
    }
    report.note("skipped_weights", format!("{skipped:?}"));
    collect_rows(&mut report, &used, |k| {
        let m = (eps * f64::from(k)).floor() as usize;
        let (basis, profiles) = lab.profiles(k, m)?;
        basis
            .forms()
            .iter()
            .zip(profiles.iter())
            .map(|(f, p)| {
                let prec = f.precision_bits();
                let mut s = Float::new(prec);
                for n in 1..=m {
                    s += Float::with_val(prec, f.lambda(n).expect("enough coefficients").square_ref());
                }
                let ek = Float::with_val(prec, eps) * k;
                let rho_l = Float::with_val(prec, &s / &ek) / &p.sym2.l;
                let rho_r = Float::with_val(prec, &s / &ek) / &p.sym2.r;
                Ok(Row {
                    k,
                    index: f.index(),
                    values: vec![
                        m.to_string(),
                        dec(&s, DIGITS),
                        dec(&p.sym2.l, DIGITS),
                        dec(&p.sym2.r, DIGITS),
                        dec(&rho_l, DIGITS),
                        dec(&rho_r, DIGITS),
                    ],
                })
            })
            .collect()
    })?;
    let mut converging = Vec::new();
    for conv in ["L", "R"] {
        let pts: Vec<(u32, f64)> = points(&report, &format!("rho_{conv}"))
            .into_iter()
            .map(|(k, x)| (k, (x - 1.0).abs()))
            .collect();
        if let Some(t) = super::report::quartile_trend(&pts) {
            report.note(&format!("rho_{conv}_dev_low_median"), fx(t.low_median));
            report.note(&format!("rho_{conv}_dev_high_median"), fx(t.high_median));
            if t.decreasing() && t.high_median <= MEAN_VALUE_GATE {
                converging.push(conv);
            }
        }
    }
    report.note(
        "converging_convention",
        match converging.as_slice() {
            [] => "none".to_string(),
            [c] => c.to_string(),
            _ => "both".to_string(),
        },
    );
    report.verdict = Verdict::TrendOnly;
    Ok(report)
}

/// Nonvanishing of `a_k(p)` for every eigenform of weight `k <= k_max`,
/// decided exactly by whether the integer characteristic polynomial of
/// `T_p` vanishes at 0.
pub fn run_lehmer_scan(lab: &Lab, p: u64, k_max: u32) -> Result<ScenarioReport> {
    if p < 2 || !crate::eigenforms::factorize(p).iter().all(|&(q, e)| q == p && e == 1) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    let ks = super::weight_grid(12, k_max);
    let mut report = ScenarioReport::new(
        "lehmer",
        &["lambda_p", "abs_lambda_p", "exact_zero_root", "suspect"],
        ("k", "abs_lambda_p"),
    );
    report.param("p", p);
    report.param("k_max", k_max);
    report.param("precision_bits", lab.precision_bits);
    let suspect_tol = Float::with_val(64, Float::i_exp(1, -(lab.precision_bits as i32) / 2));
    report.tolerance("suspect", dec(&suspect_tol, 6));
    collect_rows(&mut report, &ks, |k| {
        let basis = lab.basis(k, (p as usize).max(2))?;
        let zero_root = if p == 2 {
            basis.charpoly().constant_term() == 0
        } else {
            let d = cusp_dim(k)?;
            let vm = victor_miller_basis(k, p as usize * (d + 1))?;
            hecke_matrix(p, &vm)?.is_singular()
        };
        Ok(basis
            .forms()
            .iter()
            .map(|f| {
                let l = f.lambda(p as usize).expect("enough coefficients");
                let abs = Float::with_val(l.prec(), l.abs_ref());
                Row {
                    k,
                    index: f.index(),
                    values: vec![
                        dec(l, DIGITS),
                        dec(&abs, DIGITS),
                        zero_root.to_string(),
                        (abs < suspect_tol).to_string(),
                    ],
                }
            })
            .collect())
    })?;
    let zcol = report.column("exact_zero_root").expect("column");
    let failures: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.values[zcol] == "true")
        .map(|r| format!("k = {}: T_{p} has eigenvalue 0", r.k))
        .collect();
    if let Some((k, i, v)) = report
        .column_f64("abs_lambda_p")
        .and_then(|v| {
            report
                .rows
                .iter()
                .zip(v)
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(r, x)| (r.k, r.index, x))
        })
    {
        report.note("min_abs_lambda_p", fx(v));
        report.note("min_at", format!("k = {k}, form {i}"));
    }
    report.failures = failures;
    report.failures.dedup();
    report.verdict = if report.failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

/// Normalized cross masses of distinct eigenforms over `R`.
pub fn run_orthogonality(lab: &Lab, ks: &[u32], r: &Rectangle) -> Result<ScenarioReport> {
    for &k in ks {
        let dim = cusp_dim(k)?;
        if dim < 2 {
            return Err(Error::DimensionTooSmall { k, dim });
        }
    }
    let mut report = ScenarioReport::new(
        "orthogonality",
        &["pair", "cross", "diag_min", "ratio"],
        ("k", "cross"),
    );
    grid_param(&mut report, ks);
    report.param("rectangle", format!("({}, {}, {}, {:?})", r.a(), r.b(), r.t1(), r.t2()));
    report.param("precision_bits", lab.precision_bits);
    report.tolerance("quad_tol", lab.quad_tol);
    report.tolerance("gate", ORTHOGONALITY_GATE);
    collect_rows(&mut report, ks, |k| {
        let (basis, profiles) = lab.profiles(k, lab.mass_ncoeffs(k, r.t1())?)?;
        let forms = basis.forms();
        let diag: Vec<f64> = forms
            .iter()
            .zip(profiles.iter())
            .map(|(f, p)| rect_mass(f, r, p)?.to_f64())
            .collect::<Result<_>>()?;
        let mut rows = Vec::new();
        for i in 0..forms.len() {
            for j in (i + 1)..forms.len() {
                let c = cross_mass(&forms[i], &forms[j], r, &profiles[i], &profiles[j])?.modulus()?;
                let dmin = diag[i].min(diag[j]);
                rows.push(Row {
                    k,
                    index: forms[i].index(),
                    values: vec![forms[j].index().to_string(), fx(c), fx(dmin), fx(c / dmin)],
                });
            }
        }
        Ok(rows)
    })?;
    let mut hard = Verdict::Pass;
    if let Some(&k0) = ks.iter().min() {
        let ratio = report.column("ratio").expect("column");
        let worst = report
            .rows
            .iter()
            .filter(|r| r.k == k0)
            .map(|r| r.values[ratio].parse::<f64>().expect("number"))
            .fold(0.0, f64::max);
        report.note("gate_weight", k0);
        report.note("gate_worst_ratio", fx(worst));
        if !(worst <= ORTHOGONALITY_GATE) {
            report.failures.push(format!("k = {k0}: |cross| / min diag = {} exceeds gate", fx(worst)));
            hard = Verdict::Fail;
        }
    }
    let pts = points(&report, "cross");
    let trend = trend_verdict(&mut report, "cross", &pts);
    report.verdict = hard.and(trend);
    Ok(report)
}

/// Gap `1 - Q(k-1, k - k^{1/2+delta})` over a weight grid, with a
/// continued-fraction spot check at the largest grid weight up to `10^4`.
pub fn run_gamma_lemma(delta: f64, ks: &[u64], precision_bits: u32) -> Result<ScenarioReport> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Domain(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(Error::InsufficientRange("empty weight grid".into()));
    }
    let mut report = ScenarioReport::new("gammalemma", &["gap", "gap_scaled", "cf_gap", "cf_diff"], ("k", "gap"));
    report.param("delta", delta);
    report.param("weights", format!("{ks:?}"));
    report.param("precision_bits", precision_bits);
    report.tolerance("growth_factor", 4);
    report.tolerance("dual_path", fx(pow2(-HARD_BITS)));
    let spot = ks.iter().copied().filter(|&k| k <= 10_000).max();
    let rows: Vec<(Float, Float, Option<(Float, Float)>)> = ks
        .par_iter()
        .map(|&k| -> Result<_> {
            let gap = gamma_lemma_gap(k, delta, precision_bits)?;
            let scale = Float::with_val(precision_bits, k).pow(Float::with_val(precision_bits, delta));
            let scaled = Float::with_val(precision_bits, &gap * &scale);
            let cf = if Some(k) == spot {
                let x = gamma_lemma_argument(k, delta, precision_bits)?;
                let p = reg_inc_gamma_p_cf(k - 1, &x)?;
                let d = Float::with_val(precision_bits, &p - &gap).abs();
                Some((p, d))
            } else {
                None
            };
            Ok((gap, scaled, cf))
        })
        .collect::<Result<_>>()?;
    for (&k, (gap, scaled, cf)) in ks.iter().zip(&rows) {
        let (c, d) = match cf {
            Some((p, d)) => (dec(p, DIGITS), dec(d, 6)),
            None => (String::new(), String::new()),
        };
        report.push(k as u32, 0, vec![dec(gap, DIGITS), dec(scaled, DIGITS), c, d]);
    }
    for w in rows.windows(2).zip(ks.windows(2)) {
        if !(w.0[1].0 < w.0[0].0) {
            report.failures.push(format!("gap not decreasing from k = {} to k = {}", w.1[0], w.1[1]));
        }
    }
    let first = rows[0].1.to_f64();
    let max = rows.iter().map(|r| r.1.to_f64()).fold(0.0, f64::max);
    report.note("scaled_max_over_first", fx(max / first));
    if !(max <= 4.0 * first) {
        report.failures.push(format!("gap k^delta grows by {} > 4", fx(max / first)));
    }
    if let Some((_, _, Some((_, d)))) = rows.iter().find(|r| r.2.is_some()) {
        report.note("dual_path_weight", spot.expect("spot"));
        if !(d.to_f64() <= pow2(-HARD_BITS)) {
            report.failures.push(format!("dual path differs by {}", dec(d, 6)));
        }
    }
    report.verdict = if report.failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

/// `I_k(T) = M_k(T) + E_k(T)`: reconstruction to `2^-100`, `E` under its
/// certificate, and the quartile trend of `E`.
pub fn run_main_error(lab: &Lab, ks: &[u32], t: f64, delta: f64) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(
        "mainerror",
        &["n_cut", "M", "E", "I", "recon", "certificate"],
        ("k", "E"),
    );
    grid_param(&mut report, ks);
    report.param("T", t);
    report.param("delta", delta);
    report.param("precision_bits", lab.precision_bits);
    report.tolerance("reconstruction", fx(pow2(-HARD_BITS)));
    collect_rows(&mut report, ks, |k| {
        let (basis, profiles) = lab.profiles(k, lab.mass_ncoeffs(k, t)?)?;
        basis
            .forms()
            .iter()
            .zip(profiles.iter())
            .map(|(f, p)| {
                let s = main_error_split(f, t, delta, p)?;
                let i = vertical_mass(f, t, p)?.value;
                let recon = s.total.sub(&i).abs().div(&i);
                Ok(Row {
                    k,
                    index: f.index(),
                    values: vec![
                        s.n_cut.to_string(),
                        dec(&s.main.to_float()?, DIGITS),
                        dec(&s.error.to_float()?, DIGITS),
                        dec(&i.to_float()?, DIGITS),
                        dec(&recon.to_float()?, 6),
                        dec(&s.certificate.to_float()?, DIGITS),
                    ],
                })
            })
            .collect()
    })?;
    let (e, c, r) = (
        report.column("E").expect("column"),
        report.column("certificate").expect("column"),
        report.column("recon").expect("column"),
    );
    let mut failures = Vec::new();
    for row in &report.rows {
        let num = |i: usize| row.values[i].parse::<f64>().expect("number");
        if !(num(r) <= pow2(-HARD_BITS)) {
            failures.push(format!("k = {}, form {}: M + E - I = {}", row.k, row.index, row.values[r]));
        }
        if !(num(e) <= num(c)) {
            failures.push(format!("k = {}, form {}: E above certificate", row.k, row.index));
        }
    }
    let hard = if failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    report.failures.extend(failures);
    let pts = points(&report, "E");
    let trend = trend_verdict(&mut report, "E", &pts);
    report.verdict = hard.and(trend);
    Ok(report)
}

/// `|lambda(n)| <= tau(n) (1 + 2^-(prec/2))` for `n <= n_max`.
pub fn run_deligne(lab: &Lab, ks: &[u32], n_max: usize) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new("deligne", &["max_ratio", "argmax", "pass"], ("k", "max_ratio"));
    grid_param(&mut report, ks);
    report.param("n_max", n_max);
    report.param("precision_bits", lab.precision_bits);
    report.tolerance("slack", fx(pow2(-(lab.precision_bits as i32) / 2)));
    collect_rows(&mut report, ks, |k| {
        let basis = lab.basis(k, n_max)?;
        basis
            .forms()
            .iter()
            .map(|f| {
                let d = deligne_check(f, n_max)?;
                Ok(Row {
                    k,
                    index: f.index(),
                    values: vec![fx(d.max_ratio), d.argmax.to_string(), d.pass.to_string()],
                })
            })
            .collect()
    })?;
    let pass = report.column("pass").expect("column");
    report.failures = report
        .rows
        .iter()
        .filter(|r| r.values[pass] != "true")
        .map(|r| format!("k = {}, form {}: ratio {}", r.k, r.index, r.values[0]))
        .collect();
    report.verdict = if report.failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

/// Multiplicativity over coprime `m, n <= bound` and `lambda(4) = lambda(2)^2 - 1`.
pub fn run_hecke(lab: &Lab, ks: &[u32], bound: usize) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new("hecke", &["mult_err", "rec_err"], ("k", "mult_err"));
    grid_param(&mut report, ks);
    report.param("bound", bound);
    report.param("precision_bits", lab.precision_bits);
    report.tolerance("hard", fx(pow2(-HARD_BITS)));
    collect_rows(&mut report, ks, |k| {
        let basis = lab.basis(k, (bound * bound).max(4))?;
        basis
            .forms()
            .par_iter()
            .map(|f| {
                let prec = f.precision_bits();
                let l = |n: usize| f.lambda(n).expect("enough coefficients");
                let mut worst = Float::new(prec);
                for m in 2..=bound {
                    for n in (m + 1)..=bound {
                        if gcd(m, n) == 1 {
                            let d = Float::with_val(prec, l(m * n) - Float::with_val(prec, l(m) * l(n))).abs();
                            if d > worst {
                                worst = d;
                            }
                        }
                    }
                }
                let rec = Float::with_val(prec, l(4) - (Float::with_val(prec, l(2).square_ref()) - 1u32)).abs();
                Ok(Row {
                    k,
                    index: f.index(),
                    values: vec![dec(&worst, 6), dec(&rec, 6)],
                })
            })
            .collect()
    })?;
    let tol = pow2(-HARD_BITS);
    let failures: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.values.iter().any(|v| !(v.parse::<f64>().expect("number") <= tol)))
        .map(|r| format!("k = {}, form {}: errors {:?}", r.k, r.index, r.values))
        .collect();
    report.failures = failures;
    report.verdict = if report.failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertical_single_weight_is_trend_only_and_reuses_bases() {
        let lab = Lab::new(256);
        let r = run_vertical(&lab, &[12], 1.0).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.verdict, Verdict::TrendOnly);
        let before = lab.decompositions();
        let r2 = run_vertical(&lab, &[12], 2.0).unwrap();
        assert_eq!(lab.decompositions(), before);
        let i1: f64 = r.column_f64("I").unwrap()[0];
        let i2: f64 = r2.column_f64("I").unwrap()[0];
        assert!(i2 < i1);
    }

    #[test]
    fn vertical_and_full_width_horizontal_agree() {
        let lab = Lab::new(256);
        let v = run_vertical(&lab, &[12, 16], 1.0).unwrap();
        let h = run_horizontal(&lab, &[12, 16], -0.5, 0.5, 1.0).unwrap();
        assert_eq!(h.verdict, Verdict::Pass);
        let (iv, ih) = (v.column_f64("I").unwrap(), h.column_f64("I").unwrap());
        assert_eq!(iv, ih);
        for r in h.column_f64("r_k").unwrap() {
            assert!((r - 1.0).abs() < 1e-25);
        }
    }

    #[test]
    fn siegel_gate_and_pass() {
        let lab = Lab::new(256);
        let r = run_siegel_bound(&lab, &[12, 16], None).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.rows[0].values[0], "120");
        let low = run_siegel_bound(&lab, &[12], Some(12.0 / (4.0 * PI))).unwrap();
        assert_eq!(low.verdict, Verdict::TrendOnly);
        assert_eq!(low.summary_value("checked_rows"), Some("0"));
    }

    #[test]
    fn mean_values_guards_and_sums() {
        let lab = Lab::new(256);
        let eps = 1.0 / (4.0 * PI);
        assert!(matches!(run_mean_values(&lab, &[12, 16], eps), Err(Error::InsufficientRange(_))));
        let r = run_mean_values(&lab, &[12, 26, 28], eps).unwrap();
        assert_eq!(r.summary_value("skipped_weights"), Some("[12]"));
        assert_eq!(r.rows.len(), 1 + 2);
        let (basis, _) = lab.profiles(26, 2).unwrap();
        let f = &basis.forms()[0];
        let direct = 1.0 + f.lambda(2).unwrap().to_f64().powi(2);
        let s = r.column_f64("S").unwrap()[0];
        assert!((s - direct).abs() < 1e-15);
    }

    #[test]
    fn lehmer_scan_small() {
        let lab = Lab::new(256);
        let r = run_lehmer_scan(&lab, 2, 12).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let l: f64 = r.column_f64("lambda_p").unwrap()[0];
        assert!((l + 24.0 / 2f64.powf(5.5)).abs() < 1e-15);
        let r3 = run_lehmer_scan(&lab, 3, 24).unwrap();
        assert_eq!(r3.verdict, Verdict::Pass);
        assert!(run_lehmer_scan(&lab, 4, 24).is_err());
    }

    #[test]
    fn orthogonality_requires_two_forms() {
        let lab = Lab::new(256);
        let r = Rectangle::new(0.0, 0.25, 1.0, None).unwrap();
        assert!(matches!(run_orthogonality(&lab, &[22, 24], &r), Err(Error::DimensionTooSmall { k: 22, dim: 1 })));
        let rep = run_orthogonality(&lab, &[24], &r).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.rows[0].values[0], "2");
        assert_eq!(rep.verdict, Verdict::TrendOnly);
    }

    #[test]
    fn gamma_lemma_small_grid() {
        let r = run_gamma_lemma(0.1, &[100, 1000], 256).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(!r.rows[1].values[2].is_empty());
        for g in r.column_f64("gap").unwrap() {
            assert!(g > 0.0 && g < 0.5);
        }
        assert!(run_gamma_lemma(0.5, &[100], 256).is_err());
    }

    #[test]
    fn main_error_and_structure_checks() {
        let lab = Lab::new(256);
        let m = run_main_error(&lab, &[12, 24], 1.0, 0.1).unwrap();
        assert!(m.failures.is_empty());
        let d = run_deligne(&lab, &[12], 200).unwrap();
        assert_eq!(d.verdict, Verdict::Pass);
        let h = run_hecke(&lab, &[12, 24], 12).unwrap();
        assert_eq!(h.verdict, Verdict::Pass);
    }
}
