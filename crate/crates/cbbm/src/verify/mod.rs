//! Statistical harness confronting ensemble output with the analytics
//! predictions, plus an independent discretised oracle for cross-validation.

pub mod checks;
pub mod euler;

pub use checks::{
    check_envelope_case, check_extremes, check_first_moment, check_growth_rate,
    check_martingale, check_mixed_poisson, check_survival_decay, cross_validate, EnvelopeCase,
    ExtremesGrid, JointCountSpec,
};
pub use euler::{run_euler_oracle, EulerConfig};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Not enough data to decide at the configured thresholds.
    Inconclusive,
}

/// One comparison between an ensemble statistic and its reference value.
/// `pass` means `|statistic - reference| <= tolerance`, or `p >= threshold`
/// for distributional tests (where `statistic` carries the p-value).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub reference: f64,
    pub tolerance: f64,
    /// Standard error or p-value backing the comparison, when one exists.
    pub error_metric: Option<f64>,
    pub verdict: Verdict,
    pub runtime_secs: f64,
    pub detail: String,
}

impl TestReport {
    /// Absolute comparison: pass iff `|statistic - reference| <= tolerance`.
    pub fn absolute(
        name: impl Into<String>,
        statistic: f64,
        reference: f64,
        tolerance: f64,
        error_metric: Option<f64>,
    ) -> Self {
        let verdict = if (statistic - reference).abs() <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            name: name.into(),
            statistic,
            reference,
            tolerance,
            error_metric,
            verdict,
            runtime_secs: 0.0,
            detail: String::new(),
        }
    }

    /// One-sided comparison: pass iff `statistic <= bound + slack`.
    pub fn upper_bound(
        name: impl Into<String>,
        statistic: f64,
        bound: f64,
        slack: f64,
    ) -> Self {
        let verdict = if statistic <= bound + slack { Verdict::Pass } else { Verdict::Fail };
        Self {
            name: name.into(),
            statistic,
            reference: bound,
            tolerance: slack,
            error_metric: None,
            verdict,
            runtime_secs: 0.0,
            detail: "one-sided: statistic <= bound + slack".into(),
        }
    }

    /// Distributional comparison: pass iff `p_value >= threshold`.
    pub fn p_value(name: impl Into<String>, p_value: f64, threshold: f64) -> Self {
        let verdict = if p_value >= threshold { Verdict::Pass } else { Verdict::Fail };
        Self {
            name: name.into(),
            statistic: p_value,
            reference: threshold,
            tolerance: 0.0,
            error_metric: Some(p_value),
            verdict,
            runtime_secs: 0.0,
            detail: "p-value test: pass iff p >= threshold".into(),
        }
    }

    pub fn inconclusive(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            statistic: f64::NAN,
            reference: f64::NAN,
            tolerance: f64::NAN,
            error_metric: None,
            verdict: Verdict::Inconclusive,
            runtime_secs: 0.0,
            detail: detail.into(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}
