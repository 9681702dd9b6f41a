//! Log-space scalars, log-factorials, the regularized incomplete Gamma
//! function at integer shape and certified tail bounds.

mod gamma;
mod logreal;
pub mod oracle;
mod tail;

pub use gamma::{
    gamma_lemma_argument, gamma_lemma_gap, log_factorial, log_factorial_direct, log_factorial_stirling,
    reg_inc_gamma_q, GammaQ, DIRECT_FACTORIAL_MAX,
};
pub use logreal::{LogReal, LogSum, MAX_F64_LOG, MAX_FLOAT_LOG};
pub use tail::{
    exp_poly_tail_bound, series_truncation_index, series_truncation_index_capped, truncation_tail_bound,
    TruncationIndex, DEFAULT_TRUNCATION_CAP,
};
