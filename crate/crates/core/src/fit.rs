//! Convergence-order and log-log slope estimates.

/// Least-squares slope of `log(y)` against `log(x)`.
///
/// Pairs with `|y| < floor` are dropped; returns `None` if fewer than two
/// points remain.
pub fn loglog_slope(x: &[f64], y: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, &v)| v.abs() >= floor && v.is_finite())
        .map(|(&a, &b)| (a.ln(), b.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Pairwise observed orders `log(e_k / e_{k+1}) / log(h_k / h_{k+1})`.
pub fn pairwise_orders(h: &[f64], err: &[f64]) -> Vec<f64> {
    h.windows(2)
        .zip(err.windows(2))
        .map(|(hw, ew)| (ew[0].abs() / ew[1].abs()).ln() / (hw[0] / hw[1]).ln())
        .collect()
}

/// Ratios `e_k / e_{k+1}`.
pub fn ratios(err: &[f64]) -> Vec<f64> {
    err.windows(2).map(|w| w[0] / w[1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_power_law() {
        let x = [0.04, 0.02, 0.01, 0.005];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert_abs_diff_eq!(loglog_slope(&x, &y, 1e-14).unwrap(), 1.5, epsilon = 1e-12);
        for o in pairwise_orders(&x, &y) {
            assert_abs_diff_eq!(o, 1.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn zeros_are_dropped() {
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 0.0], 1e-14).is_none());
        let s = loglog_slope(&[1.0, 2.0, 4.0], &[0.0, 2.0, 4.0], 1e-14).unwrap();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
    }
}
