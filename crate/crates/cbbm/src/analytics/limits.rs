//! Limit-law predictors near the critical front.
//!
//! The limiting laws are mixtures of Poisson point processes tilted by the
//! almost-sure martingale limit M_∞. No closed form for the law of M_∞
//! exists, so every predictor takes an empirical [`MixingSample`] (e.g.
//! per-replicate M_s at a large checkpoint) and averages the conditional
//! expression over it. A singleton sample gives the exact conditional form.

use serde::{Deserialize, Serialize};


use super::AnalyticsError;
use crate::interval::IntervalSet;
use crate::analytics::mu_measure;

/// Empirical draws standing in for the martingale limit M_∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingSample {
    values: Vec<f64>,
}

impl MixingSample {
    pub fn new(values: Vec<f64>) -> Result<Self, AnalyticsError> {
        if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(AnalyticsError::Domain(
                "mixing sample values must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn singleton(value: f64) -> Self {
        Self { values: vec![value] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn mean_of<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64, AnalyticsError> {
        if self.values.is_empty() {
            return Err(AnalyticsError::EmptyMixing);
        }
        Ok(self.values.iter().map(|&m| f(m)).sum::<f64>() / self.values.len() as f64)
    }
}

/// Joint probability that window `i` holds exactly `k_i` particles in the
/// limit: the mixture average of ∏_i (μ_i m)^{k_i}/k_i! · e^{-μ_i m}.
pub fn mixed_poisson_joint_pmf(
    cells: &[(f64, u64)],
    mixing: &MixingSample,
) -> Result<f64, AnalyticsError> {
    for &(mu, _) in cells {
        if !(mu >= 0.0) {
            return Err(AnalyticsError::Domain(format!("window intensity {mu} must be >= 0")));
        }
    }
    mixing.mean_of(|m| {
        let mut log_p = 0.0;
        for &(mu, k) in cells {
            let lambda = mu * m;
            if lambda == 0.0 {
                if k > 0 {
                    return 0.0;
                }
                continue;
            }
            log_p += k as f64 * lambda.ln() - lambda - libm::lgamma(k as f64 + 1.0);
        }
        log_p.exp()
    })
}

/// Limiting CDF of the recentred rightmost particle R_t - βt/2:
/// the mixture average of exp{-e^{-βx} m}. Degenerate mixing {1} reduces to
/// the Gumbel CDF.
pub fn rightmost_cdf_limit(
    x: f64,
    beta: f64,
    mixing: &MixingSample,
) -> Result<f64, AnalyticsError> {
    let theta = (-beta * x).exp();
    mixing.mean_of(|m| (-theta * m).exp())
}

/// Limiting CDF of the n-th rightmost particle:
/// the mixture average of (Σ_{k=0}^{n-1} (e^{-βx} m)^k / k!) exp{-e^{-βx} m}.
/// `n = 1` coincides exactly with [`rightmost_cdf_limit`].
pub fn nth_rightmost_cdf_limit(
    n: u32,
    x: f64,
    beta: f64,
    mixing: &MixingSample,
) -> Result<f64, AnalyticsError> {
    if n < 1 {
        return Err(AnalyticsError::Domain("n must be >= 1".into()));
    }
    let theta = (-beta * x).exp();
    mixing.mean_of(|m| {
        let lambda = theta * m;
        let mut term = (-lambda).exp();
        let mut sum = term;
        for k in 1..n {
            term *= lambda / k as f64;
            sum += term;
        }
        sum.min(1.0)
    })
}

/// Limiting joint probability
/// P(L_t + βt/2 ≤ x⁻, R_t - βt/2 ≤ x⁺):
/// the mixture average of exp{-e^{-βx⁺} m} (1 - exp{-e^{βx⁻} m}).
pub fn extremes_joint_limit(
    x_minus: f64,
    x_plus: f64,
    beta: f64,
    mixing: &MixingSample,
) -> Result<f64, AnalyticsError> {
    let theta_plus = (-beta * x_plus).exp();
    let theta_minus = (beta * x_minus).exp();
    mixing.mean_of(|m| (-theta_plus * m).exp() * (1.0 - (-theta_minus * m).exp()))
}

/// Predicted prefactor (μ(A) + μ(B)) e^{-β|x0|} of the supercritical hit
/// probability decay e^{Δ_λ t}.
pub fn survival_asymptote(x0: f64, a: &IntervalSet, b: &IntervalSet, beta: f64) -> f64 {
    (mu_measure(a, beta) + mu_measure(b, beta)) * (-beta * x0.abs()).exp()
}
