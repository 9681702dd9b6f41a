//! Reproducible numeric experiments with explicit pass criteria.

mod lab;
mod report;
mod scenarios;

pub use lab::{BasisProvider, DirectProvider, Lab};
pub use report::{dec, fx, quartile_trend, Row, ScenarioReport, Trend, Verdict};
pub use scenarios::{
    run_deligne, run_gamma_lemma, run_hecke, run_horizontal, run_lehmer_scan, run_main_error, run_mean_values,
    run_orthogonality, run_siegel_bound, run_vertical, MEAN_VALUE_GATE, ORTHOGONALITY_GATE,
};

/// Even weights in `[k_min, k_max]` with a nonzero cusp space.
pub fn weight_grid(k_min: u32, k_max: u32) -> Vec<u32> {
    (k_min..=k_max)
        .filter(|k| k % 2 == 0 && crate::qseries::cusp_dim(*k).map_or(false, |d| d > 0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_skips_empty_spaces() {
        let g = weight_grid(12, 30);
        assert_eq!(g, vec![12, 16, 18, 20, 22, 24, 26, 28, 30]);
        assert!(weight_grid(2, 10).is_empty());
    }
}
