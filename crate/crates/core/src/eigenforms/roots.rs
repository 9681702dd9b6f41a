use rug::{Float, Integer};

use crate::qseries::IntPoly;

/// Dyadic rational `m / 2^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Dyadic {
    m: Integer,
    e: u32,
}

impl Dyadic {
    fn int(m: Integer) -> Self {
        Dyadic { m, e: 0 }
    }

    fn midpoint(a: &Dyadic, b: &Dyadic) -> Dyadic {
        let e = a.e.max(b.e) + 1;
        let m = Integer::from(&a.m << (e - a.e)) + Integer::from(&b.m << (e - b.e));
        Dyadic { m: m >> 1u32, e }.reduced()
    }

    fn reduced(mut self) -> Self {
        while self.e > 0 && self.m.is_even() {
            self.m >>= 1u32;
            self.e -= 1;
        }
        self
    }

    fn width_log2(a: &Dyadic, b: &Dyadic) -> i64 {
        let e = a.e.max(b.e);
        let w = Integer::from(&b.m << (e - b.e)) - Integer::from(&a.m << (e - a.e));
        i64::from(w.significant_bits()) - i64::from(e)
    }

    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.m) >> self.e
    }

    /// Exact dyadic value of a finite float.
    fn from_float(x: &Float) -> Dyadic {
        let (m, exp) = x.to_integer_exp().expect("finite");
        if exp >= 0 {
            Dyadic::int(m << exp as u32)
        } else {
            Dyadic { m, e: exp.unsigned_abs() }.reduced()
        }
    }

    /// `self + sign * 2^log2`.
    fn offset(&self, sign: i32, log2: i32) -> Dyadic {
        let step = if log2 >= 0 {
            Dyadic::int(Integer::from(sign) << log2 as u32)
        } else {
            Dyadic {
                m: Integer::from(sign),
                e: log2.unsigned_abs(),
            }
        };
        let e = self.e.max(step.e);
        let m = Integer::from(&self.m << (e - self.e)) + Integer::from(&step.m << (e - step.e));
        Dyadic { m, e }.reduced()
    }
}

/// Sturm sequence of a squarefree polynomial.
pub(crate) struct Sturm {
    chain: Vec<IntPoly>,
}

impl Sturm {
    pub(crate) fn new(p: &IntPoly) -> Self {
        let mut chain = vec![p.primitive(), p.derivative().primitive()];
        loop {
            let n = chain.len();
            let r = chain[n - 2].rem_positive_scaled(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            let neg = IntPoly::new(r.coeffs().iter().map(|c| Integer::from(-c)).collect());
            chain.push(neg);
        }
        Sturm { chain }
    }

    fn variations(&self, x: &Dyadic) -> usize {
        let mut count = 0;
        let mut last = 0;
        for p in &self.chain {
            let s = p.sign_at_dyadic(&x.m, x.e);
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Number of distinct roots in `(a, b]`.
    fn count(&self, a: &Dyadic, b: &Dyadic) -> usize {
        self.variations(a) - self.variations(b)
    }
}

/// Isolated real roots of a squarefree integer polynomial, ascending.
pub(crate) struct Isolation {
    pub real_roots: usize,
    intervals: Vec<(Dyadic, Dyadic)>,
}

/// Isolates the real roots to disjoint dyadic intervals of width at most
/// `2^-min_bits`.
pub(crate) fn isolate(p: &IntPoly, min_bits: u32) -> Isolation {
    let sturm = Sturm::new(p);
    let bound = p.root_bound();
    let lo = Dyadic::int(-bound.clone());
    let hi = Dyadic::int(bound);
    let total = sturm.count(&lo, &hi);
    let mut stack = vec![(lo, hi, total)];
    let mut out = Vec::new();
    while let Some((a, b, n)) = stack.pop() {
        match n {
            0 => {}
            1 => out.push((a, b)),
            _ => {
                let mid = Dyadic::midpoint(&a, &b);
                let left = sturm.count(&a, &mid);
                stack.push((mid.clone(), b, n - left));
                stack.push((a, mid, left));
            }
        }
    }
    out.sort_by(|x, y| x.0.to_float(64).partial_cmp(&y.0.to_float(64)).expect("finite"));
    // Shrink each interval with the sign of p itself.
    let prim = p.primitive();
    let intervals = out
        .into_iter()
        .map(|(mut a, mut b)| {
            let sb = prim.sign_at_dyadic(&b.m, b.e);
            if sb == 0 {
                return (b.clone(), b);
            }
            while Dyadic::width_log2(&a, &b) > -i64::from(min_bits) {
                let mid = Dyadic::midpoint(&a, &b);
                let sm = prim.sign_at_dyadic(&mid.m, mid.e);
                if sm == 0 {
                    return (mid.clone(), mid);
                }
                if sm == sb {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            (a, b)
        })
        .collect();
    Isolation { real_roots: total, intervals }
}

fn eval_float(p: &IntPoly, x: &Float) -> Float {
    let mut acc = Float::new(x.prec());
    for c in p.coeffs().iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

impl Isolation {
    /// Roots at `prec` bits: Newton from the interval midpoint, accepted only
    /// if `p` changes sign exactly across a few ulps around the result;
    /// otherwise (or if an iterate leaves the isolating interval) the root is
    /// found by exact bisection.
    pub(crate) fn polish(&self, p: &IntPoly, prec: u32) -> Vec<Float> {
        let dp = p.derivative();
        let prim = p.primitive();
        self.intervals
            .iter()
            .map(|(a, b)| {
                if a == b {
                    return a.to_float(prec);
                }
                let (fa, fb) = (a.to_float(prec), b.to_float(prec));
                let mut x = Dyadic::midpoint(a, b).to_float(prec);
                let eps = Float::with_val(prec, Float::i_exp(1, 8 - prec as i32));
                for _ in 0..200 {
                    let step = eval_float(p, &x) / eval_float(&dp, &x);
                    x -= &step;
                    if x < fa || x > fb {
                        return bisect(&prim, a.clone(), b.clone(), prec);
                    }
                    let scale = Float::with_val(prec, x.abs_ref()).max(&Float::with_val(prec, 1u32));
                    if step.abs() <= Float::with_val(prec, &eps * &scale) {
                        if certified(&prim, &x, prec) {
                            return x;
                        }
                        break;
                    }
                }
                bisect(&prim, a.clone(), b.clone(), prec)
            })
            .collect()
    }
}

fn certified(p: &IntPoly, x: &Float, prec: u32) -> bool {
    let scale = Float::with_val(64, x.abs_ref()).max(&Float::with_val(64, 1u32)).get_exp().unwrap_or(1);
    let ulps = scale - prec as i32 + 4;
    let c = Dyadic::from_float(x);
    let (lo, hi) = (c.offset(-1, ulps), c.offset(1, ulps));
    let (sl, sh) = (p.sign_at_dyadic(&lo.m, lo.e), p.sign_at_dyadic(&hi.m, hi.e));
    sl == 0 || sh == 0 || sl != sh
}

fn bisect(p: &IntPoly, mut a: Dyadic, mut b: Dyadic, prec: u32) -> Float {
    let sb = p.sign_at_dyadic(&b.m, b.e);
    let scale = b.to_float(64).abs().max(&Float::with_val(64, 1u32)).get_exp().unwrap_or(1);
    while Dyadic::width_log2(&a, &b) > i64::from(scale) - i64::from(prec) - 2 {
        let mid = Dyadic::midpoint(&a, &b);
        let sm = p.sign_at_dyadic(&mid.m, mid.e);
        if sm == 0 {
            return mid.to_float(prec);
        }
        if sm == sb {
            b = mid;
        } else {
            a = mid;
        }
    }
    Dyadic::midpoint(&a, &b).to_float(prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> IntPoly {
        IntPoly::new(v.iter().map(|&c| Integer::from(c)).collect())
    }

    #[test]
    fn isolates_and_polishes_quadratic() {
        // x^2 - 2
        let q = p(&[-2, 0, 1]);
        let iso = isolate(&q, 16);
        assert_eq!(iso.real_roots, 2);
        let r = iso.polish(&q, 300);
        let s2 = Float::with_val(300, 2u32).sqrt();
        assert!(Float::with_val(300, &r[1] - &s2).abs() < Float::with_val(300, Float::i_exp(1, -290)));
        assert!(Float::with_val(300, &r[0] + &s2).abs() < Float::with_val(300, Float::i_exp(1, -290)));
    }

    #[test]
    fn counts_complex_pairs_out() {
        // (x^2 + 1)(x - 3)
        let q = p(&[-3, 1, -3, 1]);
        let iso = isolate(&q, 8);
        assert_eq!(iso.real_roots, 1);
        assert_eq!(iso.polish(&q, 128)[0], 3);
    }

    #[test]
    fn close_roots_and_dyadic_roots() {
        let a = Integer::from(1) << 40u32;
        // (2x - 1)((2^41) x - (2^40 + 2))
        let c2 = Integer::from(2) * Integer::from(&a << 1u32);
        let c1 = -Integer::from(&a << 1u32) - Integer::from(2) * (Integer::from(&a) + 2);
        let c0 = Integer::from(&a) + 2;
        let q = IntPoly::new(vec![c0, c1, c2]);
        let iso = isolate(&q, 4);
        assert_eq!(iso.real_roots, 2);
        let r = iso.polish(&q, 200);
        assert!(Float::with_val(200, &r[0] - 0.5f64).abs() < Float::with_val(200, Float::i_exp(1, -190)));
        let want = Float::with_val(200, 0.5) + Float::with_val(200, Float::i_exp(1, -40));
        assert!(Float::with_val(200, &r[1] - &want).abs() < Float::with_val(200, Float::i_exp(1, -190)));
    }
}
