//! Exact transition density, first moments and second-moment envelopes.

use super::AnalyticsError;
use crate::interval::IntervalSet;
use crate::quad;
use crate::special::{normal_cdf, normal_sf};

/// Relative quadrature tolerance used by every integral in this module.
const QUAD_REL_TOL: f64 = 1e-10;

/// Transition density of the origin-attracted diffusion behind the first
/// moment formula:
///
/// p_t(x0, x) = (2πt)^{-1/2} exp{β(|x0|-|x|) - β²t/2 - (x0-x)²/(2t)}
///            + β e^{-2β|x|} Φ((βt - |x0| - |x|)/√t).
pub fn transition_density(x0: f64, x: f64, t: f64, beta: f64) -> Result<f64, AnalyticsError> {
    if !(t > 0.0) {
        return Err(AnalyticsError::Domain(format!("transition density needs t > 0, got {t}")));
    }
    let sqrt_t = t.sqrt();
    let gauss = (beta * (x0.abs() - x.abs()) - 0.5 * beta * beta * t
        - (x0 - x) * (x0 - x) / (2.0 * t))
        .exp()
        / (2.0 * std::f64::consts::PI * t).sqrt();
    let bound = beta
        * (-2.0 * beta * x.abs()).exp()
        * normal_cdf((beta * t - x0.abs() - x.abs()) / sqrt_t);
    Ok(gauss + bound)
}

/// E^{x0} |N_t^A|: the expected number of particles of the branching system
/// located in `set` at time `t`, by adaptive quadrature of
///
/// ∫_A (2πt)^{-1/2} e^{-(x0-x)²/2t} dx
///   + β e^{-β|x0| + β²t/2} ∫_A e^{-β|x|} Φ((βt-|x0|-|x|)/√t) dx.
///
/// Integrands are split at the |x| kink; infinite upper endpoints go through
/// the exponential-tail substitution (Gaussian mass analytically). At `t = 0`
/// the value is the indicator of the deterministic initial condition.
pub fn expected_count(
    x0: f64,
    t: f64,
    set: &IntervalSet,
    beta: f64,
) -> Result<f64, AnalyticsError> {
    if t < 0.0 {
        return Err(AnalyticsError::Domain(format!("expected_count needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(if set.contains(x0) { 1.0 } else { 0.0 });
    }
    let sqrt_t = t.sqrt();

    let mut gauss_mass = 0.0;
    let mut weighted = 0.0;
    let phi_weight =
        |x: f64| (-beta * x.abs()).exp() * normal_cdf((beta * t - x0.abs() - x.abs()) / sqrt_t);

    for (lo, hi) in set.iter() {
        if hi.is_finite() {
            let density = |x: f64| {
                (-(x0 - x) * (x0 - x) / (2.0 * t)).exp()
                    / (2.0 * std::f64::consts::PI * t).sqrt()
            };
            let mut pts = vec![lo];
            for kink in [0.0, x0] {
                if lo < kink && kink < hi {
                    pts.push(kink);
                }
            }
            pts.push(hi);
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            gauss_mass += quad::integrate_split(&density, &pts, QUAD_REL_TOL)?;
            weighted += quad::integrate_split(&phi_weight, &pts, QUAD_REL_TOL)?;
        } else {
            gauss_mass += normal_sf((lo - x0) / sqrt_t);
            let g = |x: f64| normal_cdf((beta * t - x0.abs() - x) / sqrt_t);
            if lo >= 0.0 {
                weighted += quad::exp_tail(&g, lo, beta, QUAD_REL_TOL)?;
            } else {
                weighted += quad::integrate_split(&phi_weight, &[lo, 0.0], QUAD_REL_TOL)?;
                weighted += quad::exp_tail(&g, 0.0, beta, QUAD_REL_TOL)?;
            }
        }
    }
    Ok(gauss_mass + beta * (-beta * x0.abs() + 0.5 * beta * beta * t).exp() * weighted)
}

/// Exact expected population size,
/// E^{x0}|N_t| = 1 + 2 e^{-β|x0| + β²t/2} Φ(β√t - |x0|/√t) - 2 Φ(-|x0|/√t),
/// extended by continuity to 1 at t = 0.
pub fn expected_population(x0: f64, t: f64, beta: f64) -> f64 {
    assert!(t >= 0.0 && beta > 0.0);
    if t == 0.0 {
        return 1.0;
    }
    let sqrt_t = t.sqrt();
    let a = x0.abs();
    1.0 + 2.0 * (-beta * a + 0.5 * beta * beta * t).exp() * normal_cdf(beta * sqrt_t - a / sqrt_t)
        - 2.0 * normal_cdf(-a / sqrt_t)
}

/// The matching envelope E^{x0}|N_t| ≤ 1 + 2 e^{-β|x0| + β²t/2}.
pub fn expected_population_upper(x0: f64, t: f64, beta: f64) -> f64 {
    assert!(t >= 0.0 && beta > 0.0);
    1.0 + 2.0 * (-beta * x0.abs() + 0.5 * beta * beta * t).exp()
}

/// The constant C = 2 (e^{-β inf A} + e^{-β inf B})² of the second-moment
/// envelope; empty sets contribute nothing (inf ∅ = ∞).
pub fn second_moment_constant(a: &IntervalSet, b: &IntervalSet, beta: f64) -> f64 {
    let term = |s: &IntervalSet| if s.is_empty() { 0.0 } else { (-beta * s.inf()).exp() };
    let sum = term(a) + term(b);
    2.0 * sum * sum
}

fn check_envelope_preconditions(
    t: f64,
    s: f64,
    lam: f64,
    a: &IntervalSet,
    b: &IntervalSet,
) -> Result<(), AnalyticsError> {
    if !(0.0..=t).contains(&s) {
        return Err(AnalyticsError::Domain(format!("need 0 <= s <= t, got s={s}, t={t}")));
    }
    for (name, set) in [("A", a), ("B", b)] {
        if !set.is_empty() && set.inf() + lam * t < 0.0 {
            return Err(AnalyticsError::Domain(format!(
                "need inf {name} + lam*t >= 0, got {}",
                set.inf() + lam * t
            )));
        }
    }
    Ok(())
}

/// The excess term C e^{-β|x0| - β²s + 2Δ_λ t} of the second-moment envelope
/// for the window (A + λt) ∪ (-B - λt) observed at time t - s.
pub fn second_moment_correction(
    x0: f64,
    t: f64,
    s: f64,
    lam: f64,
    a: &IntervalSet,
    b: &IntervalSet,
    beta: f64,
) -> Result<f64, AnalyticsError> {
    check_envelope_preconditions(t, s, lam, a, b)?;
    let c = second_moment_constant(a, b, beta);
    let delta = super::delta_lambda(lam, beta);
    Ok(c * (-beta * x0.abs() - beta * beta * s + 2.0 * delta * t).exp())
}

/// Full right-hand side of the second-moment envelope:
/// E|N_{t-s}^{(A+λt) ∪ (-B-λt)}| + C e^{-β|x0| - β²s + 2Δ_λ t}.
/// The first-moment term uses the reflection symmetry
/// E^{x0}|N^{-D}| = E^{-x0}|N^{D}| for the mirrored window.
pub fn second_moment_bound(
    x0: f64,
    t: f64,
    s: f64,
    lam: f64,
    a: &IntervalSet,
    b: &IntervalSet,
    beta: f64,
) -> Result<f64, AnalyticsError> {
    let correction = second_moment_correction(x0, t, s, lam, a, b, beta)?;
    let mut first = 0.0;
    if !a.is_empty() {
        first += expected_count(x0, t - s, &a.translate(lam * t), beta)?;
    }
    if !b.is_empty() {
        first += expected_count(-x0, t - s, &b.translate(lam * t), beta)?;
    }
    Ok(first + correction)
}

#[cfg(test)]
mod tests {
    use super::*;

    const B1: f64 = 1.0;

    #[test]
    fn density_rejects_nonpositive_time() {
        assert!(transition_density(0.0, 1.0, 0.0, B1).is_err());
        assert!(transition_density(0.0, 1.0, -2.0, B1).is_err());
    }

    #[test]
    fn density_reference_values() {
        // mpmath, 30 digits.
        let got = transition_density(0.7, 0.2, 2.0, B1).unwrap();
        assert!((got - 0.68469626274062065).abs() < 1e-13);
        let got = transition_density(0.7, -1.2, 2.0, B1).unwrap();
        assert!((got - 0.07344311626245537).abs() < 1e-14);
    }

    #[test]
    fn density_sign_flip_symmetry() {
        for (x0, x, t) in [(0.7, -1.2, 2.0), (0.0, 0.5, 1.0), (-2.0, 3.0, 4.0)] {
            let lhs = transition_density(x0, x, t, 1.3).unwrap();
            let rhs = transition_density(-x0, -x, t, 1.3).unwrap();
            assert!((lhs - rhs).abs() <= 1e-15 * lhs.abs());
        }
    }

    #[test]
    fn density_large_t_approaches_invariant_profile() {
        let got = transition_density(0.0, 0.5, 100.0, B1).unwrap();
        let want = (-1.0f64).exp(); // β e^{-2β|x|} with β = 1, x = 1/2
        assert!((got - want).abs() < 1e-3);
    }

    #[test]
    fn expected_count_initial_condition() {
        let set = IntervalSet::segment(0.0, 1.0).unwrap();
        assert_eq!(expected_count(0.5, 0.0, &set, B1).unwrap(), 1.0);
        assert_eq!(expected_count(2.0, 0.0, &set, B1).unwrap(), 0.0);
    }

    #[test]
    fn expected_count_reference_values() {
        // mpmath references for (I) + (II).
        let unit = IntervalSet::segment(0.0, 1.0).unwrap();
        let got = expected_count(0.0, 2.0, &unit, B1).unwrap();
        assert!((got - 1.74424010147461846).abs() < 1e-9, "got {got}");

        let shifted = IntervalSet::half_line(3.0);
        let got = expected_count(0.3, 6.0, &shifted, B1).unwrap();
        assert!((got - 0.686897560889815532).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn expected_count_agrees_with_population_closed_form() {
        // A = [-40, ∞) carries all but ~1e-18 of the population mass.
        let almost_r = IntervalSet::half_line(-40.0);
        for (x0, t, beta) in [(0.7, 2.0, 1.0), (0.0, 1.0, 1.0), (-1.2, 3.0, 0.8)] {
            let quadrature = expected_count(x0, t, &almost_r, beta).unwrap();
            let closed = expected_population(x0, t, beta);
            assert!(
                (quadrature / closed - 1.0).abs() < 1e-8,
                "x0={x0} t={t} beta={beta}: {quadrature} vs {closed}"
            );
        }
    }

    #[test]
    fn expected_population_reference() {
        let got = expected_population(0.0, 1.0, B1);
        assert!((got - 2.77428595767000955).abs() < 1e-12);
        assert_eq!(expected_population(0.3, 0.0, B1), 1.0);
        // Far-away start: both correction terms vanish.
        assert!((expected_population(60.0, 1.0, B1) - 1.0).abs() < 1e-12);
        // Population mean never exceeds its envelope.
        for (x0, t) in [(0.0, 1.0), (0.5, 4.0), (2.0, 9.0)] {
            assert!(expected_population(x0, t, B1) <= expected_population_upper(x0, t, B1));
        }
    }

    #[test]
    fn second_moment_constant_cases() {
        let half = IntervalSet::half_line(0.0);
        assert!((second_moment_constant(&half, &half, B1) - 8.0).abs() < 1e-15);
        assert_eq!(second_moment_constant(&IntervalSet::empty(), &IntervalSet::empty(), B1), 0.0);
    }

    #[test]
    fn second_moment_correction_values() {
        let half = IntervalSet::half_line(0.0);
        // s = t and critical speed: Δ = 0, so the correction is 8 e^{-β|x0| - β²t}.
        let t = 3.0;
        let got = second_moment_correction(0.4, t, t, 0.5, &half, &half, B1).unwrap();
        let want = 8.0 * (-0.4 - t).exp();
        assert!((got - want).abs() < 1e-14 * want.abs().max(1.0));
        // Distant start kills the correction.
        let far = second_moment_correction(500.0, t, 1.0, 0.5, &half, &half, B1).unwrap();
        assert!(far < 1e-200);
    }

    #[test]
    fn second_moment_preconditions() {
        let half = IntervalSet::half_line(0.0);
        let neg = IntervalSet::segment(-10.0, -9.0).unwrap();
        assert!(second_moment_correction(0.0, 2.0, 3.0, 0.5, &half, &half, B1).is_err());
        assert!(second_moment_correction(0.0, 2.0, 1.0, 0.5, &neg, &half, B1).is_err());
    }

    #[test]
    fn second_moment_bound_includes_first_moment() {
        let half = IntervalSet::half_line(0.0);
        let corr = second_moment_correction(0.0, 4.0, 1.0, 0.5, &half, &half, B1).unwrap();
        let full = second_moment_bound(0.0, 4.0, 1.0, 0.5, &half, &half, B1).unwrap();
        assert!(full > corr);
    }
}
