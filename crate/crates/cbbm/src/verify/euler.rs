//! Deliberately naive discretised oracle.
//!
//! The point catalyst is mollified to the rate β/(2ε) on the slab [-ε, ε]
//! and paths advance by plain Euler steps of variance dt. Nothing here is
//! shared with the exact engine beyond the record schema, so agreement
//! between the two is evidence rather than tautology.

use rand::RngExt;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{mix64, StreamKey};
use crate::simulate::{
    replicate_seed, CheckpointSummary, ReplicateRecord, SimConfig, Snapshot,
};

#[derive(Debug, Error)]
pub enum EulerError {
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("dt must be positive, got {0}")]
    BadDt(f64),
    #[error("local-time stability requires dt <= epsilon^2/10, got dt={dt}, epsilon={epsilon}")]
    UnstableStep { dt: f64, epsilon: f64 },
    #[error(transparent)]
    Config(#[from] crate::simulate::ConfigError),
}

/// Mollification half-width ε and Euler step dt, with the stability rule
/// dt ≤ ε²/10 enforced at validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerConfig {
    pub epsilon: f64,
    pub dt: f64,
}

impl EulerConfig {
    pub fn new(epsilon: f64, dt: f64) -> Result<Self, EulerError> {
        let cfg = Self { epsilon, dt };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EulerError> {
        if !(self.epsilon > 0.0) {
            return Err(EulerError::BadEpsilon(self.epsilon));
        }
        if !(self.dt > 0.0) {
            return Err(EulerError::BadDt(self.dt));
        }
        if self.dt > self.epsilon * self.epsilon / 10.0 {
            return Err(EulerError::UnstableStep { dt: self.dt, epsilon: self.epsilon });
        }
        Ok(())
    }

    /// Loosened constructor for deliberately under-resolved negative
    /// controls; skips only the stability rule.
    pub fn unchecked(epsilon: f64, dt: f64) -> Result<Self, EulerError> {
        if !(epsilon > 0.0) {
            return Err(EulerError::BadEpsilon(epsilon));
        }
        if !(dt > 0.0) {
            return Err(EulerError::BadDt(dt));
        }
        Ok(Self { epsilon, dt })
    }
}

const ORACLE_SALT: u64 = 0x6F7261636C65; // "oracle"

/// Runs the mollified Euler simulator over the same configuration and
/// record schema as the exact engine. Branching inside the slab happens
/// with probability 1 - e^{-β dt/(2ε)} per step; the child starts at the
/// parent's current position.
pub fn run_euler_oracle(
    config: &SimConfig,
    euler: &EulerConfig,
) -> Result<Vec<ReplicateRecord>, EulerError> {
    config.validate()?;
    use rayon::prelude::*;
    (0..config.replicate_count as u64)
        .into_par_iter()
        .map(|i| {
            Ok(euler_replicate(
                config,
                euler,
                replicate_seed(config.base_seed ^ mix64(ORACLE_SALT), i),
            ))
        })
        .collect()
}

fn euler_replicate(config: &SimConfig, euler: &EulerConfig, seed: u64) -> ReplicateRecord {
    let beta = config.params.beta;
    let mut rng = StreamKey::root(seed).rng();
    let mut positions = vec![config.params.x0];
    let mut summaries = Vec::with_capacity(config.checkpoints.len());
    let mut aborted = false;
    let mut window_start = 0.0;

    for &cp in &config.checkpoints {
        let width = cp - window_start;
        let steps = (width / euler.dt).ceil().max(1.0) as usize;
        let h = width / steps as f64;
        let sd = h.sqrt();
        let branch_prob = 1.0 - (-beta * h / (2.0 * euler.epsilon)).exp();

        'steps: for _ in 0..steps {
            let count = positions.len();
            for i in 0..count {
                let z: f64 = rng.sample(StandardNormal);
                positions[i] += sd * z;
                if positions[i].abs() <= euler.epsilon && rng.random::<f64>() < branch_prob {
                    if positions.len() + 1 > config.max_particles {
                        aborted = true;
                        break 'steps;
                    }
                    positions.push(positions[i]);
                }
            }
        }
        if aborted {
            break;
        }

        let snapshot = Snapshot::from_positions(cp, positions.clone(), beta);
        let window_counts = config
            .windows
            .iter()
            .map(|w| crate::simulate::observe_counts(&snapshot, w, cp))
            .collect();
        let mut top = snapshot.positions.clone();
        top.sort_by(|a, b| b.partial_cmp(a).unwrap());
        top.truncate(3);
        let keep = config.record_horizon_positions && cp == config.horizon;
        summaries.push(CheckpointSummary {
            time: cp,
            count_total: snapshot.count_total,
            martingale: snapshot.martingale,
            rightmost: snapshot.rightmost.expect("population never empty"),
            leftmost: snapshot.leftmost.expect("population never empty"),
            top_positions: top,
            window_counts,
            positions: keep.then_some(snapshot.positions),
        });
        window_start = cp;
    }

    ReplicateRecord { seed, checkpoints: summaries, aborted, events: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::ModelParams;

    #[test]
    fn config_validation() {
        assert!(EulerConfig::new(0.02, 4e-5).is_ok());
        assert!(matches!(
            EulerConfig::new(0.02, 1e-3),
            Err(EulerError::UnstableStep { .. })
        ));
        assert!(EulerConfig::new(-0.1, 1e-5).is_err());
        assert!(EulerConfig::unchecked(0.02, 4e-4).is_ok());
    }

    #[test]
    fn oracle_is_deterministic() {
        let params = ModelParams::new(1.0, 0.3).unwrap();
        let mut config = SimConfig::new(params, 0.5);
        config.replicate_count = 3;
        let euler = EulerConfig::new(0.05, 2e-4).unwrap();
        let a = run_euler_oracle(&config, &euler).unwrap();
        let b = run_euler_oracle(&config, &euler).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vanishing_branch_rate_keeps_one_particle() {
        let params = ModelParams::new(1e-12, 0.0).unwrap();
        let mut config = SimConfig::new(params, 1.0);
        config.replicate_count = 50;
        let euler = EulerConfig::new(0.1, 1e-3).unwrap();
        for record in run_euler_oracle(&config, &euler).unwrap() {
            assert_eq!(record.horizon().unwrap().count_total, 1);
        }
    }
}
