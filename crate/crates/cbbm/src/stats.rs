//! Small statistical toolbox: compensated means, medians, empirical CDFs,
//! the two-sample Kolmogorov–Smirnov test and least-squares slopes.

/// Neumaier compensated sum; order-stable accumulation for ensemble means.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n > 1, "need at least two observations");
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    let ss = compensated_sum(values.iter().map(|&v| (v - mean) * (v - mean)));
    let var = ss / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Standard error of an empirical probability.
pub fn binomial_se(p_hat: f64, n: usize) -> f64 {
    (p_hat.clamp(0.0, 1.0) * (1.0 - p_hat.clamp(0.0, 1.0)) / n as f64).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Empirical CDF value `P(X ≤ x)` of a sample at `x`.
pub fn ecdf(sorted: &[f64], x: f64) -> f64 {
    let idx = sorted.partition_point(|&v| v <= x);
    idx as f64 / sorted.len() as f64
}

/// Two-sample Kolmogorov–Smirnov statistic (sup distance between empirical
/// CDFs). Works on ties; inputs need not be sorted.
pub fn ks_two_sample_statistic(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while ia < sa.len() && ib < sb.len() {
        let x = sa[ia].min(sb[ib]);
        while ia < sa.len() && sa[ia] <= x {
            ia += 1;
        }
        while ib < sb.len() && sb[ib] <= x {
            ib += 1;
        }
        d = d.max((ia as f64 / na - ib as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sided p-value for the two-sample KS statistic, with the
/// small-sample correction of the usual Q_KS series.
pub fn ks_two_sample_p_value(d: f64, na: usize, nb: usize) -> f64 {
    let ne = (na as f64 * nb as f64) / (na as f64 + nb as f64);
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    q_ks(lambda)
}

fn q_ks(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = sign * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    assert!(x.len() == y.len() && x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_se_matches_hand_values() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        // var = 5/3, se = sqrt(5/12)
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_survives_cancellation() {
        let vals = vec![1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(vals), 2.0);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn ks_statistic_on_known_samples() {
        // Disjoint supports: D = 1.
        assert_eq!(ks_two_sample_statistic(&[1.0, 2.0], &[5.0, 6.0]), 1.0);
        // Identical samples: D = 0.
        assert_eq!(ks_two_sample_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        // Hand-computed mixed case.
        let d = ks_two_sample_statistic(&[1.0, 3.0], &[2.0, 4.0]);
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_p_value_calibration() {
        // Large identical-distribution samples: p should not be tiny;
        // strongly separated samples: p ~ 0.
        assert!(ks_two_sample_p_value(0.005, 10_000, 10_000) > 0.5);
        assert!(ks_two_sample_p_value(0.2, 10_000, 10_000) < 1e-10);
        assert!(q_ks(0.0) == 1.0);
    }

    #[test]
    fn slope_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.7 * v).collect();
        assert!((ols_slope(&x, &y) + 0.7).abs() < 1e-12);
    }

    #[test]
    fn ecdf_step_values() {
        let s = [1.0, 2.0, 2.0, 5.0];
        assert_eq!(ecdf(&s, 0.0), 0.0);
        assert_eq!(ecdf(&s, 2.0), 0.75);
        assert_eq!(ecdf(&s, 5.0), 1.0);
    }
}
