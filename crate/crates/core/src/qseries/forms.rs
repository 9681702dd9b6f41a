use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rug::ops::Pow;
use rug::{Integer, Rational};

use super::series::PowerSeries;
use crate::error::{Error, Result};

/// Bernoulli numbers `B_0..=B_n` (convention `B_1 = -1/2`).
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    b.push(Rational::from(1));
    for m in 1..=n {
        // sum_{j=0}^{m} C(m+1, j) B_j = 0
        let mut acc = Rational::new();
        let mut binom = Integer::from(1);
        for (j, bj) in b.iter().enumerate() {
            acc += Rational::from(bj * &binom);
            binom *= (m + 1 - j) as u32;
            binom /= (j + 1) as u32;
        }
        b.push(-acc / Rational::from(m as u32 + 1));
    }
    b
}

/// `sigma_{e}(n)` for `n = 0..=order` (entry 0 is zero).
pub fn divisor_power_sums(e: u32, order: usize) -> Vec<Integer> {
    let mut sigma = vec![Integer::new(); order + 1];
    for d in 1..=order {
        let pw = Integer::from(d as u64).pow(e);
        let mut m = d;
        while m <= order {
            sigma[m] += &pw;
            m += d;
        }
    }
    sigma
}

/// Normalized Eisenstein series `E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n`,
/// stored as `series / denominator` with an integral `series`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eisenstein {
    pub weight: u32,
    pub series: PowerSeries,
    pub denominator: Integer,
}

impl Eisenstein {
    /// The series itself when the denominator is 1 (weights 4, 6, 8, 10, 14).
    pub fn integral(&self) -> Option<&PowerSeries> {
        (self.denominator == 1).then_some(&self.series)
    }
}

pub fn eisenstein_series(k: u32, order: usize) -> Result<Eisenstein> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::InvalidWeight(k));
    }
    let bk = bernoulli_numbers(k as usize).pop().expect("nonempty");
    let factor = Rational::from(-2 * i64::from(k)) / bk;
    let (num, den) = factor.into_numer_denom();
    let sigma = divisor_power_sums(k - 1, order);
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(den.clone());
    coeffs.extend(sigma.into_iter().skip(1).map(|s| s * &num));
    Ok(Eisenstein {
        weight: k,
        series: PowerSeries::from_coeffs(coeffs),
        denominator: den,
    })
}

/// `prod_{n>=1} (1 - q^n)` via Euler's pentagonal number theorem.
fn euler_product(order: usize) -> PowerSeries {
    let mut s = PowerSeries::zero(order).into_coeffs();
    s[0] = Integer::from(1);
    for j in 1i64.. {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let p1 = (j * (3 * j - 1) / 2) as usize;
        let p2 = (j * (3 * j + 1) / 2) as usize;
        if p1 > order {
            break;
        }
        s[p1] += sign;
        if p2 <= order {
            s[p2] += sign;
        }
    }
    PowerSeries::from_coeffs(s)
}

/// `Delta = q prod (1 - q^n)^24` to order `N`.
pub fn delta_series(order: usize) -> PowerSeries {
    let eta24 = euler_product(order).pow(24);
    let mut coeffs = vec![Integer::new()];
    coeffs.extend(eta24.into_coeffs().into_iter().take(order));
    PowerSeries::from_coeffs(coeffs)
}

/// `Delta = (E_4^3 - E_6^2) / 1728`, the second construction.
pub fn delta_from_eisenstein(order: usize) -> PowerSeries {
    let e4 = eisenstein_series(4, order).expect("weight 4").series;
    let e6 = eisenstein_series(6, order).expect("weight 6").series;
    (&e4.pow(3) - &e6.square()).div_exact(&Integer::from(1728))
}

/// Dimension of `S_k(SL(2, Z))`.
pub fn cusp_dim(k: u32) -> Result<usize> {
    if k % 2 == 1 {
        return Err(Error::InvalidWeight(k));
    }
    if k < 12 || k == 14 {
        return Ok(0);
    }
    let q = (k / 12) as usize;
    Ok(if k % 12 == 2 { q - 1 } else { q })
}

/// `E_4`, `E_6` and `Delta` at a fixed order with memoized powers, shared
/// across weights.
#[derive(Debug)]
pub struct Generators {
    order: usize,
    powers: Mutex<HashMap<(u8, u32), Arc<PowerSeries>>>,
}

const E4: u8 = 0;
const E6: u8 = 1;
const DELTA: u8 = 2;

impl Generators {
    pub fn new(order: usize) -> Self {
        Generators {
            order,
            powers: Mutex::new(HashMap::new()),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn base(&self, which: u8) -> PowerSeries {
        match which {
            E4 => eisenstein_series(4, self.order).expect("weight 4").series,
            E6 => eisenstein_series(6, self.order).expect("weight 6").series,
            _ => delta_series(self.order),
        }
    }

    fn power(&self, which: u8, e: u32) -> Arc<PowerSeries> {
        if let Some(p) = self.powers.lock().expect("poisoned").get(&(which, e)) {
            return Arc::clone(p);
        }
        let value = match e {
            0 => PowerSeries::one(self.order),
            1 => self.base(which),
            _ => {
                let half = self.power(which, e / 2);
                let sq = half.square();
                if e % 2 == 1 {
                    sq.mul(&self.power(which, 1))
                } else {
                    sq
                }
            }
        };
        let value = Arc::new(value);
        self.powers
            .lock()
            .expect("poisoned")
            .entry((which, e))
            .or_insert(value)
            .clone()
    }

    pub fn e4_pow(&self, e: u32) -> Arc<PowerSeries> {
        self.power(E4, e)
    }

    pub fn e6_pow(&self, e: u32) -> Arc<PowerSeries> {
        self.power(E6, e)
    }

    pub fn delta_pow(&self, e: u32) -> Arc<PowerSeries> {
        self.power(DELTA, e)
    }

    /// `E_4^a E_6^b Delta^c`.
    pub fn monomial(&self, a: u32, b: u32, c: u32) -> PowerSeries {
        let mut acc = (*self.delta_pow(c)).clone();
        if a > 0 {
            acc = acc.mul(&self.e4_pow(a));
        }
        if b > 0 {
            acc = acc.mul(&self.e6_pow(b));
        }
        acc
    }
}

/// Miller's echelon basis of `S_k`: `g_i = q^i + O(q^{d+1})`, integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VictorMillerBasis {
    weight: u32,
    basis: Vec<PowerSeries>,
}

impl VictorMillerBasis {
    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn order(&self) -> usize {
        self.basis[0].order()
    }

    pub fn basis(&self) -> &[PowerSeries] {
        &self.basis
    }

    pub fn element(&self, i: usize) -> &PowerSeries {
        &self.basis[i]
    }
}

pub fn victor_miller_basis(k: u32, order: usize) -> Result<VictorMillerBasis> {
    victor_miller_basis_with(&Generators::new(order), k)
}

/// Exponents `(a, b)` with `4a + 6b = r`, `b` minimal; `None` if `r` is not
/// representable.
fn e4_e6_exponents(r: u32) -> Option<(u32, u32)> {
    match r % 4 {
        0 => Some((r / 4, 0)),
        2 if r >= 6 => Some(((r - 6) / 4, 1)),
        _ => None,
    }
}

pub fn victor_miller_basis_with(gens: &Generators, k: u32) -> Result<VictorMillerBasis> {
    let d = cusp_dim(k)?;
    if d == 0 {
        return Err(Error::DimensionZero(k));
    }
    let order = gens.order();
    if order < 2 * d + 1 {
        return Err(Error::InsufficientOrder {
            have: order,
            need: 2 * d + 1,
        });
    }
    // Delta^c E_4^a E_6^b, c = 1..=d, has valuation exactly c.
    let mut rows: Vec<PowerSeries> = (1..=d as u32)
        .map(|c| {
            let (a, b) = e4_e6_exponents(k - 12 * c).ok_or(Error::InvalidWeight(k))?;
            Ok(gens.monomial(a, b, c))
        })
        .collect::<Result<_>>()?;

    // Gauss-Jordan on the columns q^1..q^d.
    for col in 1..=d {
        let pivot_row = (col - 1..d)
            .find(|&r| *rows[r].coeff(col) != 0)
            .ok_or(Error::InsufficientOrder { have: order, need: d })?;
        rows.swap(col - 1, pivot_row);
        let pivot = rows[col - 1].coeff(col).clone();
        if pivot != 1 && pivot != -1 {
            // Miller's monomials are unitriangular; anything else means the
            // construction is broken.
            unreachable!("non-unit pivot {pivot} in weight {k}");
        }
        if pivot == -1 {
            rows[col - 1] = -&rows[col - 1];
        }
        let prow = rows[col - 1].clone();
        for (ri, r) in rows.iter_mut().enumerate() {
            let f = r.coeff(col).clone();
            if ri != col - 1 && f != 0 {
                r.sub_mul_assign(&f, &prow);
            }
        }
    }
    Ok(VictorMillerBasis { weight: k, basis: rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(s: &PowerSeries) -> Vec<i64> {
        s.coeffs().iter().map(|c| c.to_i64().unwrap()).collect()
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli_numbers(12);
        assert_eq!(b[2], Rational::from((1, 6)));
        assert_eq!(b[4], Rational::from((-1, 30)));
        assert_eq!(b[6], Rational::from((1, 42)));
        assert_eq!(b[12], Rational::from((-691, 2730)));
        assert_eq!(b[3], 0);
    }

    #[test]
    fn eisenstein_small_weights() {
        // sigma_3: 1, 9, 28 ; -8/B_4 = 240
        let e4 = eisenstein_series(4, 3).unwrap();
        assert_eq!(ints(e4.integral().unwrap()), vec![1, 240, 2160, 6720]);
        // sigma_5: 1, 33 ; -12/B_6 = -504
        let e6 = eisenstein_series(6, 2).unwrap();
        assert_eq!(ints(e6.integral().unwrap()), vec![1, -504, -16632]);
        assert_eq!(ints(eisenstein_series(4, 0).unwrap().integral().unwrap()), vec![1]);
    }

    #[test]
    fn eisenstein_rational_weight() {
        // E_12 = 1 + (65520/691) sum sigma_11(n) q^n
        let e12 = eisenstein_series(12, 2).unwrap();
        assert_eq!(e12.denominator, 691);
        assert_eq!(e12.series.coeff(1), &Integer::from(65520));
        assert_eq!(e12.series.coeff(2), &(Integer::from(65520) * 2049));
    }

    #[test]
    fn eisenstein_rejects_bad_weights() {
        assert_eq!(eisenstein_series(5, 3), Err(Error::InvalidWeight(5)));
        assert_eq!(eisenstein_series(2, 3), Err(Error::InvalidWeight(2)));
    }

    #[test]
    fn delta_leading_terms() {
        assert_eq!(ints(&delta_series(7)), vec![0, 1, -24, 252, -1472, 4830, -6048, -16744]);
        assert_eq!(ints(&delta_series(1)), vec![0, 1]);
    }

    #[test]
    fn delta_constructions_agree() {
        assert_eq!(delta_series(50), delta_from_eisenstein(50));
    }

    #[test]
    fn cusp_dimensions() {
        let want = [(2, 0), (10, 0), (12, 1), (14, 0), (16, 1), (24, 2), (26, 1), (36, 3), (38, 2)];
        for (k, d) in want {
            assert_eq!(cusp_dim(k).unwrap(), d, "k = {k}");
        }
        assert!(cusp_dim(13).is_err());
    }

    #[test]
    fn miller_basis_weight_12_is_delta() {
        let b = victor_miller_basis(12, 10).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(b.element(0), &delta_series(10));
    }

    #[test]
    fn miller_basis_weight_16() {
        let b = victor_miller_basis(16, 5).unwrap();
        let want = delta_series(5).mul(&eisenstein_series(4, 5).unwrap().series);
        assert_eq!(b.element(0), &want);
        assert_eq!(ints(b.element(0))[..3], [0, 1, 216]);
    }

    #[test]
    fn miller_basis_weight_24_is_echelon() {
        let b = victor_miller_basis(24, 10).unwrap();
        assert_eq!(b.dim(), 2);
        assert_eq!(ints(b.element(0))[..3], [0, 1, 0]);
        assert_eq!(ints(b.element(1))[..3], [0, 0, 1]);
    }

    #[test]
    fn miller_basis_errors() {
        assert_eq!(victor_miller_basis(14, 10), Err(Error::DimensionZero(14)));
        assert!(matches!(
            victor_miller_basis(24, 4),
            Err(Error::InsufficientOrder { need: 5, .. })
        ));
    }

    #[test]
    fn echelon_invariants_for_all_weights() {
        let gens = Generators::new(30);
        for k in (12..=60).step_by(2) {
            let d = cusp_dim(k).unwrap();
            if d == 0 {
                continue;
            }
            let b = victor_miller_basis_with(&gens, k).unwrap();
            assert_eq!(b.dim(), d);
            assert_eq!(b.element(0).coeff(1), &Integer::from(1), "k = {k}");
            for (i, g) in b.basis().iter().enumerate() {
                assert_eq!(g.coeff(0), &Integer::new());
                for j in 1..=d {
                    let want = u32::from(j == i + 1);
                    assert_eq!(g.coeff(j), &Integer::from(want), "k = {k}, g_{}, q^{j}", i + 1);
                }
            }
        }
    }
}
