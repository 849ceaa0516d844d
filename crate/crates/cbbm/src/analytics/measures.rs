//! The boundary measure μ, the invariant measure π and the speed-class
//! exponent Δ_λ.

use serde::{Deserialize, Serialize};

use crate::interval::IntervalSet;

/// μ(D) = ∫_D β e^{-βy} dy, evaluated exactly from the antiderivative.
/// Not a probability measure: sets reaching below 0 carry mass above 1.
pub fn mu_measure(set: &IntervalSet, beta: f64) -> f64 {
    assert!(beta > 0.0, "beta must be positive");
    set.iter()
        .map(|(lo, hi)| {
            let upper = if hi.is_finite() { (-beta * hi).exp() } else { 0.0 };
            (-beta * lo).exp() - upper
        })
        .sum()
}

/// π(D) = ∫_D β e^{-β|x|} dx; the total mass over ℝ is 2.
pub fn pi_measure(set: &IntervalSet, beta: f64) -> f64 {
    assert!(beta > 0.0, "beta must be positive");
    set.iter()
        .map(|(lo, hi)| {
            if lo >= 0.0 {
                let upper = if hi.is_finite() { (-beta * hi).exp() } else { 0.0 };
                (-beta * lo).exp() - upper
            } else if hi <= 0.0 {
                (beta * hi).exp() - (beta * lo).exp()
            } else {
                let upper = if hi.is_finite() { (-beta * hi).exp() } else { 0.0 };
                2.0 - (beta * lo).exp() - upper
            }
        })
        .sum()
}

/// The exponential growth/decay rate Δ_λ of the number of particles
/// travelling at speed λ: ½β² - βλ for λ ≤ β and -½λ² for λ ≥ β. The two
/// branches agree at λ = β. Positive below β/2, zero at β/2, negative above.
pub fn delta_lambda(lam: f64, beta: f64) -> f64 {
    assert!(lam > 0.0 && beta > 0.0, "lam and beta must be positive");
    if lam <= beta {
        0.5 * beta * beta - beta * lam
    } else {
        -0.5 * lam * lam
    }
}

/// Regime of a travel speed relative to the critical speed β/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// λ < β/2: exponentially growing counts.
    Subcritical,
    /// λ = β/2: the front itself.
    Critical,
    /// β/2 < λ < β: counts die out, hit probability decays at rate Δ_λ.
    Supercritical,
    /// λ ≥ β: outside the scope of the implemented results.
    OutOfScope,
}

/// A travel speed λ > 0 together with its regime classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedClass {
    pub lam: f64,
}

impl SpeedClass {
    pub fn new(lam: f64) -> Option<Self> {
        (lam > 0.0 && lam.is_finite()).then_some(Self { lam })
    }

    pub fn regime(&self, beta: f64) -> Regime {
        let half = 0.5 * beta;
        if self.lam < half {
            Regime::Subcritical
        } else if self.lam == half {
            Regime::Critical
        } else if self.lam < beta {
            Regime::Supercritical
        } else {
            Regime::OutOfScope
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_basic_values() {
        assert_eq!(mu_measure(&IntervalSet::empty(), 1.0), 0.0);
        assert!((mu_measure(&IntervalSet::half_line(0.0), 1.0) - 1.0).abs() < 1e-15);
        let unit = IntervalSet::segment(0.0, 1.0).unwrap();
        assert!((mu_measure(&unit, 1.0) - 0.632120558828557678).abs() < 1e-15);
    }

    #[test]
    fn pi_basic_values() {
        // Two half-lines exhausting the real line carry total mass 2.
        let below = IntervalSet::new(vec![(-1e6, 0.0)]).unwrap();
        let total = pi_measure(&below, 1.0) + pi_measure(&IntervalSet::half_line(0.0), 1.0);
        assert!((total - 2.0).abs() < 1e-12);
        assert!((pi_measure(&IntervalSet::half_line(0.0), 1.0) - 1.0).abs() < 1e-15);
        // Reference from the antiderivative of 2e^{-2|x|} over [-1, 1).
        let sym = IntervalSet::segment(-1.0, 1.0).unwrap();
        assert!((pi_measure(&sym, 2.0) - 1.72932943352677461).abs() < 1e-14);
    }

    #[test]
    fn pi_straddling_matches_split() {
        let whole = IntervalSet::segment(-0.7, 1.3).unwrap();
        let left = IntervalSet::segment(-0.7, 0.0).unwrap();
        let right = IntervalSet::segment(0.0, 1.3).unwrap();
        for beta in [0.5, 1.0, 2.5] {
            let diff =
                pi_measure(&whole, beta) - pi_measure(&left, beta) - pi_measure(&right, beta);
            assert!(diff.abs() < 1e-14);
        }
    }

    #[test]
    fn delta_lambda_values_and_junction() {
        assert_eq!(delta_lambda(0.5, 1.0), 0.0);
        assert!((delta_lambda(0.25, 1.0) - 0.25).abs() < 1e-15);
        // Both branches agree at lam = beta.
        let beta = 1.7;
        assert!((delta_lambda(beta, beta) + 0.5 * beta * beta).abs() < 1e-15);
    }

    #[test]
    fn delta_lambda_is_decreasing_with_sign_change() {
        let beta = 1.3;
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let lam = i as f64 * 0.02;
            let d = delta_lambda(lam, beta);
            assert!(d < prev);
            prev = d;
            let expected_sign = (0.5 * beta - lam).signum();
            if lam != 0.5 * beta {
                assert_eq!(d.signum(), expected_sign, "lam={lam}");
            }
        }
    }

    #[test]
    fn regimes() {
        let beta = 2.0;
        assert_eq!(SpeedClass::new(0.5).unwrap().regime(beta), Regime::Subcritical);
        assert_eq!(SpeedClass::new(1.0).unwrap().regime(beta), Regime::Critical);
        assert_eq!(SpeedClass::new(1.5).unwrap().regime(beta), Regime::Supercritical);
        assert_eq!(SpeedClass::new(2.0).unwrap().regime(beta), Regime::OutOfScope);
        assert!(SpeedClass::new(0.0).is_none());
    }
}
