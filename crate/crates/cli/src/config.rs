//! Scenario parameters shared by `verify` flags and `sweep` config files.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use quelab_core::massmeasure::{Rectangle, DEFAULT_QUAD_TOL, DEFAULT_Y_SPLIT};
use quelab_core::verify::{self, Lab, ScenarioReport};
use serde::Deserialize;

use crate::emit::Format;

pub const DEFAULT_PRECISION_BITS: u32 = 256;
pub const MIN_PRECISION_BITS: u32 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Vertical,
    Horizontal,
    Siegel,
    Meanvalues,
    Lehmer,
    Orthogonality,
    Gammalemma,
    Mainerror,
    Deligne,
    Hecke,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Vertical => "vertical",
            Scenario::Horizontal => "horizontal",
            Scenario::Siegel => "siegel",
            Scenario::Meanvalues => "meanvalues",
            Scenario::Lehmer => "lehmer",
            Scenario::Orthogonality => "orthogonality",
            Scenario::Gammalemma => "gammalemma",
            Scenario::Mainerror => "mainerror",
            Scenario::Deligne => "deligne",
            Scenario::Hecke => "hecke",
        }
    }

    /// Default `(k_min, k_max, step)`.
    fn default_grid(self) -> (u32, u32, u32) {
        match self {
            Scenario::Siegel => (12, 24, 2),
            Scenario::Orthogonality => (24, 72, 4),
            Scenario::Deligne | Scenario::Hecke => (12, 60, 2),
            _ => (12, 120, 2),
        }
    }
}

/// Scenario flags. Every field is optional; unset ones take per-scenario
/// defaults.
#[derive(Clone, Debug, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    /// Smallest weight of the grid.
    #[arg(long)]
    pub k_min: Option<u32>,
    /// Largest weight of the grid.
    #[arg(long)]
    pub k_max: Option<u32>,
    /// Spacing of the grid, counted from k-min.
    #[arg(long)]
    pub step: Option<u32>,
    /// Explicit weights, overriding the grid.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<u32>>,
    /// Height T (Siegel: overrides ceil(4 k ln k)).
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Prime for the Lehmer scan.
    #[arg(long)]
    pub p: Option<u64>,
    /// Coefficient range for the Deligne check.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Range of m, n in the multiplicativity check.
    #[arg(long)]
    pub bound: Option<usize>,
    /// Weights for the incomplete Gamma gap.
    #[arg(long, value_delimiter = ',')]
    pub gamma_weights: Option<Vec<u64>>,
}

/// Error from bad user input, reported with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn check_weights(ks: &[u32]) -> Result<(), UsageError> {
    match ks.iter().find(|&&k| k < 12 || k % 2 == 1) {
        Some(k) => Err(UsageError(format!("weight {k} must be even and at least 12"))),
        None => Ok(()),
    }
}

impl ScenarioParams {
    /// Weight grid for `scenario`; empty cusp spaces are dropped.
    pub fn weights(&self, scenario: Scenario) -> Result<Vec<u32>, UsageError> {
        if let Some(ws) = &self.weights {
            check_weights(ws)?;
            let mut ws = ws.clone();
            ws.sort_unstable();
            ws.dedup();
            return Ok(ws
                .into_iter()
                .filter(|k| verify::weight_grid(*k, *k).len() == 1)
                .collect());
        }
        let (lo, hi, step) = scenario.default_grid();
        let (lo, hi, step) = (self.k_min.unwrap_or(lo), self.k_max.unwrap_or(hi), self.step.unwrap_or(step));
        check_weights(&[lo])?;
        if step == 0 || step % 2 == 1 {
            return Err(UsageError(format!("step {step} must be positive and even")));
        }
        Ok(verify::weight_grid(lo, hi)
            .into_iter()
            .filter(|k| (k - lo) % step == 0)
            .collect())
    }

    pub fn run(&self, scenario: Scenario, lab: &Lab) -> Result<ScenarioReport, RunError> {
        let t = self.t.unwrap_or(1.0);
        let delta = self.delta.unwrap_or(0.1);
        let r = match scenario {
            Scenario::Vertical => verify::run_vertical(lab, &self.weights(scenario)?, t),
            Scenario::Horizontal => verify::run_horizontal(
                lab,
                &self.weights(scenario)?,
                self.a.unwrap_or(0.0),
                self.b.unwrap_or(0.25),
                t,
            ),
            Scenario::Siegel => verify::run_siegel_bound(lab, &self.weights(scenario)?, self.t),
            Scenario::Meanvalues => {
                verify::run_mean_values(lab, &self.weights(scenario)?, self.eps.unwrap_or(1.0 / (4.0 * PI)))
            }
            Scenario::Lehmer => verify::run_lehmer_scan(lab, self.p.unwrap_or(2), self.k_max.unwrap_or(120)),
            Scenario::Orthogonality => {
                let rect = Rectangle::new(
                    self.a.unwrap_or(0.0),
                    self.b.unwrap_or(0.25),
                    self.t1.unwrap_or(1.0),
                    self.t2,
                )?;
                verify::run_orthogonality(lab, &self.weights(scenario)?, &rect)
            }
            Scenario::Gammalemma => {
                let ks = self.gamma_weights.clone().unwrap_or_else(|| vec![100, 1_000, 10_000, 100_000]);
                verify::run_gamma_lemma(delta, &ks, lab.precision_bits)
            }
            Scenario::Mainerror => verify::run_main_error(lab, &self.weights(scenario)?, t, delta),
            Scenario::Deligne => verify::run_deligne(lab, &self.weights(scenario)?, self.n_max.unwrap_or(2000)),
            Scenario::Hecke => verify::run_hecke(lab, &self.weights(scenario)?, self.bound.unwrap_or(50)),
        };
        Ok(r?)
    }
}

/// Usage problems map to exit code 2, numeric ones to 3.
#[derive(Debug)]
pub enum RunError {
    Usage(UsageError),
    Numeric(quelab_core::Error),
    Io(std::io::Error),
}

impl From<UsageError> for RunError {
    fn from(e: UsageError) -> Self {
        RunError::Usage(e)
    }
}

impl From<quelab_core::Error> for RunError {
    fn from(e: quelab_core::Error) -> Self {
        RunError::Numeric(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(e) => write!(f, "usage error: {e}"),
            RunError::Numeric(e) => write!(f, "numeric error: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn default_precision() -> u32 {
    DEFAULT_PRECISION_BITS
}

fn default_y_split() -> f64 {
    DEFAULT_Y_SPLIT
}

fn default_quad_tol() -> f64 {
    DEFAULT_QUAD_TOL
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("quelab-reports")
}

/// One `[[scenario]]` table of a sweep file.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct SweepEntry {
    pub kind: Scenario,
    /// Output file stem; defaults to the scenario name.
    pub name: Option<String>,
    #[serde(default)]
    pub params: ScenarioParams,
}

/// Contents of a `sweep --config` file.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_precision")]
    pub precision_bits: u32,
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    #[serde(default = "default_y_split")]
    pub y_split: f64,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub scenario: Vec<SweepEntry>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let c: RunConfig = toml::from_str(text).map_err(|e| UsageError(e.to_string()))?;
        check_precision(c.precision_bits)?;
        let mut names: Vec<String> = c.scenario.iter().map(SweepEntry::stem).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(UsageError(format!("duplicate scenario name {:?}", w[0])));
        }
        for s in &c.scenario {
            if s.kind != Scenario::Gammalemma && s.kind != Scenario::Lehmer {
                s.params.weights(s.kind)?;
            }
        }
        Ok(c)
    }
}

impl SweepEntry {
    pub fn stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.name().to_string())
    }
}

pub fn check_precision(bits: u32) -> Result<(), UsageError> {
    if bits < MIN_PRECISION_BITS {
        return Err(UsageError(format!("precision_bits {bits} is below {MIN_PRECISION_BITS}")));
    }
    Ok(())
}
