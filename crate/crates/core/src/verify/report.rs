use rug::Float;
use serde::{Deserialize, Serialize};

/// Outcome of a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "TREND-ONLY")]
    TrendOnly,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::TrendOnly => "TREND-ONLY",
        }
    }

    /// Combines a hard check with another verdict; any failure wins.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::TrendOnly, _) | (_, Verdict::TrendOnly) => Verdict::TrendOnly,
            _ => Verdict::Pass,
        }
    }
}

/// One grid cell: weight, form index and values aligned with the report
/// columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub k: u32,
    pub index: usize,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub params: Vec<(String, String)>,
    /// Value columns after `k` and `index`.
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub verdict: Verdict,
    pub tolerances: Vec<(String, String)>,
    /// Derived statistics (quartile medians, named conventions, minima).
    pub summary: Vec<(String, String)>,
    /// Violating grid points, one line each.
    pub failures: Vec<String>,
    /// Columns used for plot data (`x`, `y`).
    pub plot: (String, String),
    pub runtime_s: Option<f64>,
}

impl ScenarioReport {
    pub fn new(scenario: &str, columns: &[&str], plot: (&str, &str)) -> Self {
        ScenarioReport {
            scenario: scenario.into(),
            params: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            verdict: Verdict::TrendOnly,
            tolerances: Vec::new(),
            summary: Vec::new(),
            failures: Vec::new(),
            plot: (plot.0.into(), plot.1.into()),
            runtime_s: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.into(), value.to_string()));
    }

    pub fn tolerance(&mut self, key: &str, value: impl ToString) {
        self.tolerances.push((key.into(), value.to_string()));
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, k: u32, index: usize, values: Vec<String>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(Row { k, index, values });
    }

    /// Column position by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a column parsed as doubles.
    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        self.rows.iter().map(|r| r.values[i].parse().ok()).collect()
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Decimal string of an arbitrary-precision value with `digits` significant
/// digits.
pub fn dec(x: &Float, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

/// Decimal string of a double in scientific notation.
pub fn fx(x: f64) -> String {
    format!("{x:.12e}")
}

/// Quartile-median comparison of a statistic over a weight grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trend {
    pub low_weights: Vec<u32>,
    pub high_weights: Vec<u32>,
    pub low_median: f64,
    pub high_median: f64,
}

impl Trend {
    /// The statistic is smaller on the largest weights.
    pub fn decreasing(&self) -> bool {
        self.high_median < self.low_median
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Median of `stat` over rows whose weight is in the smallest quarter of the
/// distinct weights against the largest quarter. `None` when there are fewer
/// than four weights.
pub fn quartile_trend(points: &[(u32, f64)]) -> Option<Trend> {
    let mut ks: Vec<u32> = points.iter().map(|p| p.0).collect();
    ks.sort_unstable();
    ks.dedup();
    let q = ks.len() / 4;
    if q == 0 {
        return None;
    }
    let low_weights = ks[..q].to_vec();
    let high_weights = ks[ks.len() - q..].to_vec();
    let pick = |ws: &[u32]| points.iter().filter(|p| ws.contains(&p.0)).map(|p| p.1).collect::<Vec<_>>();
    Some(Trend {
        low_median: median(pick(&low_weights)),
        high_median: median(pick(&high_weights)),
        low_weights,
        high_weights,
    })
}

/// Records a trend in the report summary and returns its verdict.
pub(crate) fn trend_verdict(report: &mut ScenarioReport, label: &str, points: &[(u32, f64)]) -> Verdict {
    match quartile_trend(points) {
        None => {
            report.note(&format!("{label}_trend"), "insufficient grid");
            Verdict::TrendOnly
        }
        Some(t) => {
            report.note(&format!("{label}_low_median"), fx(t.low_median));
            report.note(&format!("{label}_high_median"), fx(t.high_median));
            if t.decreasing() {
                Verdict::Pass
            } else {
                report.failures.push(format!(
                    "{label}: median {} over k in {:?} is not below {} over k in {:?}",
                    fx(t.high_median),
                    t.high_weights,
                    fx(t.low_median),
                    t.low_weights
                ));
                Verdict::Fail
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles() {
        let pts: Vec<(u32, f64)> = (0..8).map(|i| (12 + 2 * i, 10.0 - f64::from(i))).collect();
        let t = quartile_trend(&pts).unwrap();
        assert_eq!(t.low_weights, vec![12, 14]);
        assert_eq!(t.high_weights, vec![24, 26]);
        assert_eq!(t.low_median, 9.5);
        assert_eq!(t.high_median, 3.5);
        assert!(t.decreasing());
        assert!(quartile_trend(&pts[..3]).is_none());
    }

    #[test]
    fn verdicts_combine() {
        assert_eq!(Verdict::Pass.and(Verdict::Fail), Verdict::Fail);
        assert_eq!(Verdict::Pass.and(Verdict::TrendOnly), Verdict::TrendOnly);
        assert_eq!(Verdict::Pass.and(Verdict::Pass), Verdict::Pass);
    }

    #[test]
    fn decimal_strings() {
        assert_eq!(fx(0.5), "5.000000000000e-1");
        assert_eq!(dec(&Float::with_val(64, 0.25), 5), "2.5000e-1");
    }
}
