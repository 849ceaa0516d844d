//! Finite unions of disjoint half-open intervals `[lo, hi)`.
//!
//! This is the Borel-set subclass every set-valued argument in the crate
//! accepts. Lower endpoints are always finite (the model's standing
//! assumption `inf A > -∞`); upper endpoints may be `+∞`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IntervalError {
    #[error("interval [{lo}, {hi}) is empty or reversed")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("lower endpoint {lo} must be finite")]
    InfiniteLower { lo: f64 },
    #[error("intervals must be sorted and disjoint: [{prev_lo}, {prev_hi}) then [{lo}, ..)")]
    OverlapOrUnsorted { prev_lo: f64, prev_hi: f64, lo: f64 },
    #[error("endpoint is NaN")]
    NanEndpoint,
}

/// A finite union of disjoint half-open intervals, sorted by lower endpoint.
/// The empty sequence represents ∅.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    /// Validates and builds a set from `(lo, hi)` pairs. Pairs must be
    /// strictly increasing and pairwise disjoint; `hi` may be `+∞`.
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self, IntervalError> {
        let mut prev: Option<(f64, f64)> = None;
        for &(lo, hi) in &intervals {
            if lo.is_nan() || hi.is_nan() {
                return Err(IntervalError::NanEndpoint);
            }
            if !lo.is_finite() {
                return Err(IntervalError::InfiniteLower { lo });
            }
            if !(lo < hi) {
                return Err(IntervalError::EmptyInterval { lo, hi });
            }
            if let Some((plo, phi)) = prev {
                // Touching intervals ([a,b) + [b,c)) are allowed to stay
                // distinct; only genuine overlap or disorder is rejected.
                if lo < phi {
                    return Err(IntervalError::OverlapOrUnsorted {
                        prev_lo: plo,
                        prev_hi: phi,
                        lo,
                    });
                }
            }
            prev = Some((lo, hi));
        }
        Ok(Self { intervals })
    }

    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    /// The half-line `[lo, ∞)`.
    pub fn half_line(lo: f64) -> Self {
        Self { intervals: vec![(lo, f64::INFINITY)] }
    }

    /// A single segment `[lo, hi)`.
    pub fn segment(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        Self::new(vec![(lo, hi)])
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.intervals.iter().copied()
    }

    /// `inf` of the set; `+∞` for the empty set, matching the convention
    /// `inf ∅ = ∞`.
    pub fn inf(&self) -> f64 {
        self.intervals.first().map_or(f64::INFINITY, |&(lo, _)| lo)
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        // Few intervals in practice; linear scan with early exit.
        for &(lo, hi) in &self.intervals {
            if x < lo {
                return false;
            }
            if x < hi {
                return true;
            }
        }
        false
    }

    /// The translate `A + c`.
    pub fn translate(&self, c: f64) -> Self {
        Self {
            intervals: self.intervals.iter().map(|&(lo, hi)| (lo + c, hi + c)).collect(),
        }
    }

    /// Total Lebesgue length, possibly `+∞`.
    pub fn length(&self) -> f64 {
        self.intervals.iter().map(|&(lo, hi)| hi - lo).sum()
    }
}
