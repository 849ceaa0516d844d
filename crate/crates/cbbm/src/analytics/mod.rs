//! Closed-form quantities of the catalytic model: boundary and invariant
//! measures, the speed-class exponent, exact first moments, second-moment
//! envelopes and the mixed-Poisson limit-law predictors.
//!
//! Everything here is pure and reentrant; the only runtime failure modes are
//! domain violations and quadrature non-convergence.

mod limits;
mod measures;
mod moments;

pub use limits::{
    extremes_joint_limit, mixed_poisson_joint_pmf, nth_rightmost_cdf_limit, rightmost_cdf_limit,
    survival_asymptote, MixingSample,
};
pub use measures::{delta_lambda, mu_measure, pi_measure, Regime, SpeedClass};
pub use moments::{
    expected_count, expected_population, expected_population_upper, second_moment_bound,
    second_moment_constant, second_moment_correction, transition_density,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("mixing sample is empty")]
    EmptyMixing,
    #[error(transparent)]
    Quad(#[from] crate::quad::QuadError),
}
