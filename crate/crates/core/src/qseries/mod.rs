//! Exact q-expansions and the cusp-form space `S_k(SL(2, Z))`.
//!
//! Everything here is integer arithmetic: Eisenstein series with their
//! rational normalizing constant cleared into a stored denominator, the
//! discriminant `Delta`, Miller's echelon basis and the matrices of the Hecke
//! operators `T_p` on it.

mod forms;
mod hecke;
mod poly;
mod series;

pub use forms::{
    bernoulli_numbers, cusp_dim, delta_from_eisenstein, delta_series, divisor_power_sums,
    eisenstein_series, victor_miller_basis, victor_miller_basis_with, Eisenstein, Generators,
    VictorMillerBasis,
};
pub use hecke::{hecke_matrix, hecke_operator, HeckeMatrix};
pub use poly::IntPoly;
pub use series::PowerSeries;
