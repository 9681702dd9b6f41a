use std::fmt;

use rug::{Integer, Rational};

/// Dense univariate polynomial with exact integer coefficients, lowest degree
/// first. The zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<Integer>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Integer> {
        self.coeffs.last()
    }

    pub fn constant_term(&self) -> Integer {
        self.coeffs.first().cloned().unwrap_or_default()
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Integer::from(c * i as u64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Integer) -> Integer {
        let mut acc = Integer::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Sign of `p(m / 2^e)`, evaluated exactly as `2^{e deg} p(m / 2^e)`.
    pub fn sign_at_dyadic(&self, m: &Integer, e: u32) -> i32 {
        let mut acc = Integer::new();
        let mut scale = Integer::from(1);
        // Horner on the homogenized polynomial: sum c_i m^i 2^{e(deg - i)}
        for c in self.coeffs.iter().rev() {
            acc *= m;
            acc += Integer::from(c * &scale);
            scale <<= e;
        }
        acc.cmp0() as i32
    }

    /// Content-free copy with positive leading coefficient.
    pub fn primitive(&self) -> IntPoly {
        let mut g = Integer::new();
        for c in &self.coeffs {
            g.gcd_mut(c);
        }
        if g == 0 {
            return self.clone();
        }
        if self.leading().is_some_and(|l| *l < 0) {
            g = -g;
        }
        IntPoly::new(self.coeffs.iter().map(|c| Integer::from(c.div_exact_ref(&g))).collect())
    }

    /// Remainder of `self` divided by `other` over the rationals, scaled by a
    /// positive constant to integer coefficients. Signs are preserved, which is
    /// what Sturm chains need.
    pub fn rem_positive_scaled(&self, other: &IntPoly) -> IntPoly {
        let dq = other.degree().expect("division by the zero polynomial");
        let mut r: Vec<Rational> = self.coeffs.iter().map(|c| Rational::from(c.clone())).collect();
        let lead = Rational::from(other.leading().expect("nonzero").clone());
        while r.len() > dq && !r.is_empty() {
            let top = r.len() - 1;
            let f = Rational::from(&r[top] / &lead);
            if f != 0 {
                for (i, c) in other.coeffs.iter().enumerate() {
                    r[top - dq + i] -= Rational::from(&f * c);
                }
            }
            r.pop();
            while r.last().is_some_and(|c| *c == 0) {
                r.pop();
            }
        }
        let mut denom_lcm = Integer::from(1);
        for c in &r {
            denom_lcm.lcm_mut(c.denom());
        }
        let ints = r
            .into_iter()
            .map(|c| {
                let (n, d) = (c * &denom_lcm).into_numer_denom();
                debug_assert_eq!(d, 1);
                n
            })
            .collect();
        let p = IntPoly::new(ints);
        // Divide by the positive content only.
        let mut g = Integer::new();
        for c in &p.coeffs {
            g.gcd_mut(c);
        }
        if g > 1 {
            IntPoly::new(p.coeffs.iter().map(|c| Integer::from(c.div_exact_ref(&g))).collect())
        } else {
            p
        }
    }

    /// Greatest common divisor, primitive with positive leading coefficient.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let (mut a, mut b) = (self.primitive(), other.primitive());
        while !b.is_zero() {
            let r = a.rem_positive_scaled(&b).primitive();
            a = b;
            b = r;
        }
        a.primitive()
    }

    /// Cauchy bound: every root has absolute value below `1 + max|c_i / c_n|`,
    /// returned as an integer upper bound.
    pub fn root_bound(&self) -> Integer {
        let lead = Integer::from(self.leading().expect("nonzero").abs_ref());
        let mut m = Integer::new();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let q = Integer::from(c.abs_ref()).div_rem_ceil(lead.clone()).0;
            if q > m {
                m = q;
            }
        }
        m + 1
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if *c < 0 { '-' } else { '+' })?;
            } else if *c < 0 {
                write!(f, "-")?;
            }
            first = false;
            let a = Integer::from(c.abs_ref());
            match i {
                0 => write!(f, "{a}")?,
                1 if a == 1 => write!(f, "x")?,
                1 => write!(f, "{a}*x")?,
                _ if a == 1 => write!(f, "x^{i}")?,
                _ => write!(f, "{a}*x^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> IntPoly {
        IntPoly::new(v.iter().map(|&c| Integer::from(c)).collect())
    }

    #[test]
    fn dyadic_sign_matches_rational_eval() {
        // (x - 1/2)(x + 3) = x^2 + 5/2 x - 3/2  ->  2x^2 + 5x - 3
        let q = p(&[-3, 5, 2]);
        assert_eq!(q.sign_at_dyadic(&Integer::from(1), 1), 0); // x = 1/2
        assert_eq!(q.sign_at_dyadic(&Integer::from(0), 0), -1);
        assert_eq!(q.sign_at_dyadic(&Integer::from(-13), 2), 1); // -3.25
        assert_eq!(q.sign_at_dyadic(&Integer::from(-11), 2), -1); // -2.75
    }

    #[test]
    fn gcd_detects_repeated_roots() {
        // (x - 2)^2 (x + 1)
        let q = p(&[4, 0, -3, 1]);
        assert_eq!(q.gcd(&q.derivative()), p(&[-2, 1]));
        assert_eq!(p(&[-2, 0, 1]).gcd(&p(&[0, 2])), p(&[1]));
    }

    #[test]
    fn display_and_bounds() {
        assert_eq!(p(&[-3, 0, 1]).to_string(), "x^2 - 3");
        assert_eq!(p(&[0, 0]).degree(), None);
        assert!(p(&[-1080, 0, 1]).root_bound() > 32);
    }
}
