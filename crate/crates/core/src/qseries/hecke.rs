use rug::ops::Pow;
use rug::Integer;

use super::forms::VictorMillerBasis;
use super::poly::IntPoly;
use super::series::PowerSeries;
use crate::error::{Error, Result};

/// Matrix of `T_p` on a Victor-Miller basis: `T_p g_i = sum_j M[j][i] g_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeMatrix {
    pub p: u64,
    pub weight: u32,
    entries: Vec<Vec<Integer>>,
}

/// `T_p` on a weight-`k` q-expansion: `b(n) = a(pn) + p^{k-1} a(n/p)`,
/// returned to order `floor(N / p)`.
pub fn hecke_operator(f: &PowerSeries, p: u64, k: u32) -> PowerSeries {
    let p_us = p as usize;
    let order = f.order() / p_us;
    let pk = Integer::from(p).pow(k - 1);
    let coeffs = (0..=order)
        .map(|n| {
            let mut b = f.coeff(n * p_us).clone();
            if n % p_us == 0 {
                b += &pk * f.coeff(n / p_us);
            }
            b
        })
        .collect();
    PowerSeries::from_coeffs(coeffs)
}

pub fn hecke_matrix(p: u64, basis: &VictorMillerBasis) -> Result<HeckeMatrix> {
    let d = basis.dim();
    let need = p as usize * (d + 1);
    if basis.order() < need {
        return Err(Error::InsufficientOrder {
            have: basis.order(),
            need,
        });
    }
    let k = basis.weight();
    let images: Vec<PowerSeries> = basis.basis().iter().map(|g| hecke_operator(g, p, k)).collect();
    // Echelon read-off: the coefficient of q^j (j <= d) is the g_j coordinate.
    let entries = (1..=d)
        .map(|j| images.iter().map(|img| img.coeff(j).clone()).collect())
        .collect();
    Ok(HeckeMatrix { p, weight: k, entries })
}

impl HeckeMatrix {
    pub fn from_entries(p: u64, weight: u32, entries: Vec<Vec<Integer>>) -> Self {
        let d = entries.len();
        assert!(entries.iter().all(|r| r.len() == d), "matrix must be square");
        HeckeMatrix { p, weight, entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> &Integer {
        &self.entries[row][col]
    }

    pub fn rows(&self) -> &[Vec<Integer>] {
        &self.entries
    }

    pub fn trace(&self) -> Integer {
        (0..self.dim()).map(|i| &self.entries[i][i]).sum()
    }

    pub fn mul(&self, other: &HeckeMatrix) -> Vec<Vec<Integer>> {
        let d = self.dim();
        assert_eq!(d, other.dim());
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).map(|l| Integer::from(&self.entries[i][l] * &other.entries[l][j])).sum())
                    .collect()
            })
            .collect()
    }

    /// `det(x I - M)` by Faddeev-LeVerrier; every division is exact over Z.
    pub fn charpoly(&self) -> IntPoly {
        let d = self.dim();
        let mut coeffs = vec![Integer::new(); d + 1];
        coeffs[d] = Integer::from(1);
        // m_k = A m_{k-1} + c_{d-k+1} I ; c_{d-k} = -tr(A m_k) / k
        let mut m: Vec<Vec<Integer>> = vec![vec![Integer::new(); d]; d];
        for step in 1..=d {
            let mut next = vec![vec![Integer::new(); d]; d];
            for i in 0..d {
                for j in 0..d {
                    let mut acc = Integer::new();
                    for l in 0..d {
                        acc += &self.entries[i][l] * &m[l][j];
                    }
                    next[i][j] = acc;
                }
                next[i][i] += &coeffs[d - step + 1];
            }
            m = next;
            let mut tr = Integer::new();
            for i in 0..d {
                for l in 0..d {
                    tr += &self.entries[i][l] * &m[l][i];
                }
            }
            let step_int = Integer::from(step as u64);
            debug_assert!(tr.is_divisible(&step_int));
            coeffs[d - step] = -tr.div_exact(&step_int);
        }
        IntPoly::new(coeffs)
    }

    /// Exact test for a zero eigenvalue, i.e. `a(p) = 0` for some eigenform.
    pub fn is_singular(&self) -> bool {
        self.charpoly().constant_term() == 0
    }
}
