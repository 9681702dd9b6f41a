use std::ops::{Add, Neg, Sub};

use rayon::prelude::*;
use rug::Integer;

/// Output coefficients per parallel task in [`PowerSeries::mul`].
const MUL_BLOCK: usize = 256;
/// Below this order the product is formed on the calling thread.
const PARALLEL_THRESHOLD: usize = 1024;

/// Truncated q-expansion `c_0 + c_1 q + ... + c_N q^N` with exact integer
/// coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<Integer>,
}

impl PowerSeries {
    pub fn zero(order: usize) -> Self {
        PowerSeries {
            coeffs: vec![Integer::new(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = Integer::from(1);
        s
    }

    /// `q^n` truncated at `order` (zero if `n > order`).
    pub fn monomial(n: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if n <= order {
            s.coeffs[n] = Integer::from(1);
        }
        s
    }

    /// Builds a series from its coefficients; the order is `coeffs.len() - 1`.
    ///
    /// Panics on an empty vector.
    pub fn from_coeffs(coeffs: Vec<Integer>) -> Self {
        assert!(!coeffs.is_empty(), "a power series needs at least one coefficient");
        PowerSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &Integer {
        &self.coeffs[n]
    }

    pub fn into_coeffs(self) -> Vec<Integer> {
        self.coeffs
    }

    /// Index of the first nonzero coefficient, `None` for the zero series.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != 0)
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncated series");
        PowerSeries {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    pub fn scale(&self, factor: &Integer) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|c| Integer::from(c * factor)).collect(),
        }
    }

    /// Exact division of every coefficient; panics if a coefficient is not
    /// divisible, since that means an upstream identity is broken.
    pub fn div_exact(&self, divisor: &Integer) -> Self {
        PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    assert!(c.is_divisible(divisor), "inexact division of a q-series");
                    Integer::from(c.div_exact_ref(divisor))
                })
                .collect(),
        }
    }

    /// `self -= factor * other`, coefficient-wise.
    pub fn sub_mul_assign(&mut self, factor: &Integer, other: &PowerSeries) {
        assert_eq!(self.order(), other.order(), "order mismatch");
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c -= factor * o;
        }
    }

    /// Truncated product. Orders must agree; the result has the same order.
    pub fn mul(&self, other: &PowerSeries) -> PowerSeries {
        assert_eq!(self.order(), other.order(), "order mismatch");
        let n = self.order();
        let (Some(va), Some(vb)) = (self.valuation(), other.valuation()) else {
            return PowerSeries::zero(n);
        };
        let coeff = |i: usize| -> Integer {
            let mut acc = Integer::new();
            if i >= va + vb {
                for j in va..=(i - vb) {
                    acc += &self.coeffs[j] * &other.coeffs[i - j];
                }
            }
            acc
        };
        let coeffs = if n < PARALLEL_THRESHOLD {
            (0..=n).map(coeff).collect()
        } else {
            let blocks: Vec<Vec<Integer>> = (0..=n)
                .collect::<Vec<_>>()
                .par_chunks(MUL_BLOCK)
                .map(|idx| idx.iter().map(|&i| coeff(i)).collect())
                .collect();
            blocks.into_iter().flatten().collect()
        };
        PowerSeries { coeffs }
    }

    pub fn square(&self) -> PowerSeries {
        self.mul(self)
    }

    pub fn pow(&self, mut exp: u32) -> PowerSeries {
        let mut result = PowerSeries::one(self.order());
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.square();
            }
        }
        result
    }
}

impl Add for &PowerSeries {
    type Output = PowerSeries;
    fn add(self, rhs: &PowerSeries) -> PowerSeries {
        assert_eq!(self.order(), rhs.order(), "order mismatch");
        PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| Integer::from(a + b))
                .collect(),
        }
    }
}

impl Sub for &PowerSeries {
    type Output = PowerSeries;
    fn sub(self, rhs: &PowerSeries) -> PowerSeries {
        assert_eq!(self.order(), rhs.order(), "order mismatch");
        PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| Integer::from(a - b))
                .collect(),
        }
    }
}

impl Neg for &PowerSeries {
    type Output = PowerSeries;
    fn neg(self) -> PowerSeries {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|c| Integer::from(-c)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(v: &[i64]) -> PowerSeries {
        PowerSeries::from_coeffs(v.iter().map(|&c| Integer::from(c)).collect())
    }

    #[test]
    fn product_is_truncated() {
        // (1 + q)^2 = 1 + 2q + q^2, cut at order 1
        let a = series(&[1, 1]);
        assert_eq!(a.square(), series(&[1, 2]));
        assert_eq!(a.pow(0), series(&[1, 0]));
    }

    #[test]
    fn valuation_skips_leading_zeros() {
        assert_eq!(series(&[0, 0, 3]).valuation(), Some(2));
        assert_eq!(series(&[0, 0]).valuation(), None);
        assert_eq!(series(&[0, 1, 0]).mul(&series(&[0, 0, 1])), series(&[0, 0, 0]));
    }

    #[test]
    fn parallel_and_serial_products_agree() {
        let n = PARALLEL_THRESHOLD + 37;
        let a = PowerSeries::from_coeffs((0..=n).map(|i| Integer::from(i % 7) - 3).collect());
        let b = PowerSeries::from_coeffs((0..=n).map(|i| Integer::from(i * i % 11)).collect());
        let fast = a.mul(&b);
        for i in [0, 1, 500, n] {
            let mut acc = Integer::new();
            for j in 0..=i {
                acc += a.coeff(j) * b.coeff(i - j);
            }
            assert_eq!(fast.coeff(i), &acc);
        }
    }

    proptest! {
        #[test]
        fn multiplication_commutes_and_distributes(
            a in proptest::collection::vec(-50i64..50, 8),
            b in proptest::collection::vec(-50i64..50, 8),
            c in proptest::collection::vec(-50i64..50, 8),
        ) {
            let (a, b, c) = (series(&a), series(&b), series(&c));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&(&b + &c)), &a.mul(&b) + &a.mul(&c));
            prop_assert_eq!(a.pow(3), a.mul(&a).mul(&a));
        }
    }
}
