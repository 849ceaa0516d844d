//! Exact samplers for the event-driven engine.
//!
//! Three classical identities make the scheme discretisation-free:
//!
//! * reflection principle — the first passage time of Brownian motion from
//!   `x ≠ 0` to the origin is distributed as `x²/Z²` with `Z` standard
//!   normal, so the hit/no-hit decision and the hit time come from a single
//!   normal draw;
//! * the zero-avoiding endpoint density `φ_w(y-x) - φ_w(y+x)` on the `x`
//!   side, sampled by rejection with acceptance weight `1 - e^{-2xy/w}`;
//! * Lévy's identity — from the origin, `(|X_w|, L_w)` is distributed as
//!   `(U·R, (1-U)·R)` with `R = √w · χ₃` (Maxwell) and `U` uniform, and the
//!   inverse local time at level `ℓ` is `ℓ²/Z²`.
//!
//! All samplers are pure functions of their inputs and the supplied stream;
//! rejection loops carry an iteration cap so pathological inputs surface as
//! diagnosable errors instead of hangs.

use rand::RngExt;
use rand_distr::{Exp1, StandardNormal};
use thiserror::Error;

use crate::rng::StreamRng;

/// Iteration cap for every rejection loop.
pub const REJECTION_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("{sampler} exceeded {cap} rejection iterations (near-degenerate input)")]
    IterationCap { sampler: &'static str, cap: usize },
}

/// Outcome of a first-passage query over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FirstPassage {
    /// The origin was not reached within the window.
    NoHit,
    /// The origin was first reached `elapsed` into the window.
    Hit { elapsed: f64 },
}

/// Outcome of evolving a particle from the origin over a window against a
/// local-time threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowOutcome {
    /// Local time stayed below the threshold; the particle sits at
    /// `abs_position` (in absolute value) at the window end.
    Survived { abs_position: f64 },
    /// Local time crossed the threshold `elapsed` into the window.
    Branched { elapsed: f64 },
}

/// Local-time level at which a particle branches: Exponential with rate β.
#[inline]
pub fn sample_threshold(beta: f64, rng: &mut StreamRng) -> f64 {
    debug_assert!(beta > 0.0);
    let e: f64 = rng.sample(Exp1);
    e / beta
}

/// Standard normal conditioned on `|Z| ≥ a`, `a > 0`. Plain rejection below
/// `a = 1`; exponential-proposal tail rejection above.
pub fn sample_truncated_normal_tail(a: f64, rng: &mut StreamRng) -> Result<f64, SampleError> {
    debug_assert!(a > 0.0);
    if a < 1.0 {
        for _ in 0..REJECTION_CAP {
            let z: f64 = rng.sample(StandardNormal);
            if z.abs() >= a {
                return Ok(z);
            }
        }
        return Err(SampleError::IterationCap { sampler: "truncated_normal_tail", cap: REJECTION_CAP });
    }
    for _ in 0..REJECTION_CAP {
        let e1: f64 = rng.sample(Exp1);
        let e2: f64 = rng.sample(Exp1);
        let x = e1 / a;
        if e2 >= 0.5 * x * x {
            let z = a + x;
            return Ok(if rng.random::<bool>() { z } else { -z });
        }
    }
    Err(SampleError::IterationCap { sampler: "truncated_normal_tail", cap: REJECTION_CAP })
}

/// First passage to the origin from `x0 ≠ 0` within a window. `Hit` has
/// probability `2Φ(-|x0|/√window)`; conditional on hitting, the elapsed time
/// is `x0²/Z²` with `Z` in the two-sided normal tail `|Z| ≥ |x0|/√window` —
/// realised here by a single unconditioned draw of `Z`.
#[inline]
pub fn sample_first_passage(x0: f64, window: f64, rng: &mut StreamRng) -> FirstPassage {
    debug_assert!(x0 != 0.0 && window > 0.0);
    let z: f64 = rng.sample(StandardNormal);
    if z * z * window >= x0 * x0 {
        FirstPassage::Hit { elapsed: (x0 * x0 / (z * z)).min(window) }
    } else {
        FirstPassage::NoHit
    }
}

/// Endpoint of the window conditioned on never reaching the origin: density
/// proportional to `φ_w(y-x0) - φ_w(y+x0)` on the side of `x0`. Rejection
/// from `N(x0, window)` restricted to that side with acceptance weight
/// `1 - e^{-2 x0 y / window}`.
pub fn sample_no_hit_position(
    x0: f64,
    window: f64,
    rng: &mut StreamRng,
) -> Result<f64, SampleError> {
    debug_assert!(x0 != 0.0 && window > 0.0);
    let sd = window.sqrt();
    for _ in 0..REJECTION_CAP {
        let z: f64 = rng.sample(StandardNormal);
        let y = x0 + sd * z;
        if y * x0.signum() <= 0.0 {
            continue;
        }
        let accept = 1.0 - (-2.0 * x0 * y / window).exp();
        if rng.random::<f64>() < accept {
            return Ok(y);
        }
    }
    Err(SampleError::IterationCap { sampler: "no_hit_position", cap: REJECTION_CAP })
}

/// Joint (|position|, local time) over a window started at the origin,
/// resolved against a local-time threshold. Uses the Maxwell × Uniform form
/// of Lévy's identity; on a branch the elapsed time is the inverse local
/// time `threshold²/Z²` with `|Z| ≥ threshold/√window`. By construction
/// `P(Branched) = 2Φ(-threshold/√window)`.
pub fn sample_window_from_origin(
    window: f64,
    threshold: f64,
    rng: &mut StreamRng,
) -> Result<WindowOutcome, SampleError> {
    debug_assert!(window > 0.0 && threshold > 0.0);
    let (z1, z2, z3): (f64, f64, f64) = (
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    let r = window.sqrt() * (z1 * z1 + z2 * z2 + z3 * z3).sqrt();
    let u: f64 = rng.random();
    let local_time = (1.0 - u) * r;
    if local_time < threshold {
        Ok(WindowOutcome::Survived { abs_position: u * r })
    } else {
        let z = sample_truncated_normal_tail(threshold / window.sqrt(), rng)?;
        Ok(WindowOutcome::Branched { elapsed: (threshold * threshold / (z * z)).min(window) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    fn rng(tag: u64) -> StreamRng {
        StreamKey::root(1234).child(tag).rng()
    }

    #[test]
    fn threshold_is_positive_and_scales() {
        let mut r = rng(0);
        let mean_b2: f64 = (0..20_000).map(|_| sample_threshold(2.0, &mut r)).sum::<f64>() / 20_000.0;
        assert!(mean_b2 > 0.47 && mean_b2 < 0.53, "mean {mean_b2}");
        // β → large pushes draws toward zero.
        let q: f64 = (0..2_000).map(|_| sample_threshold(1e6, &mut r)).fold(0.0, f64::max);
        assert!(q < 1e-4);
    }

    #[test]
    fn truncated_tail_respects_support_and_sign() {
        let mut r = rng(1);
        let mut pos = 0usize;
        for _ in 0..20_000 {
            let z = sample_truncated_normal_tail(2.0, &mut r).unwrap();
            assert!(z.abs() >= 2.0);
            pos += (z > 0.0) as usize;
        }
        let frac = pos as f64 / 20_000.0;
        assert!((frac - 0.5).abs() < 0.02, "sign balance {frac}");
        for _ in 0..20_000 {
            assert!(sample_truncated_normal_tail(0.3, &mut r).unwrap().abs() >= 0.3);
        }
    }

    #[test]
    fn first_passage_hit_time_within_window() {
        let mut r = rng(2);
        for _ in 0..50_000 {
            if let FirstPassage::Hit { elapsed } = sample_first_passage(0.8, 1.5, &mut r) {
                assert!(elapsed > 0.0 && elapsed <= 1.5);
            }
        }
    }

    #[test]
    fn no_hit_position_keeps_sign() {
        let mut r = rng(3);
        for _ in 0..20_000 {
            assert!(sample_no_hit_position(1.2, 0.7, &mut r).unwrap() > 0.0);
            assert!(sample_no_hit_position(-0.4, 2.0, &mut r).unwrap() < 0.0);
        }
    }

    #[test]
    fn origin_window_branch_time_within_window() {
        let mut r = rng(4);
        for _ in 0..50_000 {
            match sample_window_from_origin(0.9, 0.5, &mut r).unwrap() {
                WindowOutcome::Survived { abs_position } => assert!(abs_position >= 0.0),
                WindowOutcome::Branched { elapsed } => assert!(elapsed > 0.0 && elapsed <= 0.9),
            }
        }
    }

    #[test]
    fn infinite_threshold_never_branches() {
        let mut r = rng(5);
        for _ in 0..5_000 {
            assert!(matches!(
                sample_window_from_origin(2.0, f64::INFINITY, &mut r).unwrap(),
                WindowOutcome::Survived { .. }
            ));
        }
    }

    #[test]
    fn samplers_replay_bit_identically() {
        let run = || -> Vec<f64> {
            let mut r = rng(6);
            let mut out = Vec::new();
            for _ in 0..100 {
                out.push(sample_threshold(1.0, &mut r));
                out.push(sample_truncated_normal_tail(1.7, &mut r).unwrap());
                out.push(sample_no_hit_position(0.9, 1.1, &mut r).unwrap());
                match sample_window_from_origin(1.3, 0.8, &mut r).unwrap() {
                    WindowOutcome::Survived { abs_position } => out.push(abs_position),
                    WindowOutcome::Branched { elapsed } => out.push(-elapsed),
                }
            }
            out
        };
        assert_eq!(run(), run());
    }
}
