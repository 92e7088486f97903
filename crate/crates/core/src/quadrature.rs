//! Gauss-Legendre rules, composite and adaptive integration, and the polar
//! tensor-product rules used for integrals over the annulus.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::AnnulusGeometry;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        neumaier_sum(self.mapped(a, b).map(|(x, w)| w * f(x)))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Compensated (Neumaier) summation; the result does not depend on thread
/// scheduling as long as the input order is fixed.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
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

/// Splits each interval between consecutive `breaks` into `cells` equal cells.
pub fn refine_breaks(breaks: &[f64], cells: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((breaks.len().saturating_sub(1)) * cells + 1);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        for k in 0..cells {
            out.push(a + (b - a) * k as f64 / cells as f64);
        }
    }
    if let Some(&last) = breaks.last() {
        out.push(last);
    }
    out
}

/// Sorted, de-duplicated breakpoints of `[a, b]` including every interior `cut`.
pub fn breakpoints(a: f64, b: f64, cuts: &[f64]) -> Vec<f64> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = cuts.iter().copied().filter(|&c| c > a && c < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for c in inner {
        if c - *pts.last().unwrap() > 1e-14 * (1.0 + c.abs()) {
            pts.push(c);
        }
    }
    if b - *pts.last().unwrap() > 1e-14 * (1.0 + b.abs()) {
        pts.push(b);
    } else {
        *pts.last_mut().unwrap() = b;
    }
    pts
}

/// Composite Gauss rule over consecutive panels given by `breaks`.
pub fn composite_nodes(rule: &GaussLegendre, breaks: &[f64]) -> Vec<(f64, f64)> {
    breaks
        .windows(2)
        .flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>())
        .collect()
}

pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rule: &GaussLegendre) -> f64 {
    neumaier_sum(composite_nodes(rule, breaks).into_iter().map(|(x, w)| w * f(x)))
}

/// Adaptive bisection with a 10-point Gauss rule per panel.
///
/// A panel is accepted when the one-panel and two-half-panel estimates agree
/// to `max(rtol * |estimate|, atol)`.
pub fn adaptive_gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rtol: f64, atol: f64) -> f64 {
    thread_local! {
        static RULE: GaussLegendre = GaussLegendre::new(10);
    }
    RULE.with(|rule| adaptive_inner(f, rule, a, b, rule.integrate(f, a, b), rtol, atol, 0))
}

#[allow(clippy::too_many_arguments)]
fn adaptive_inner<F: Fn(f64) -> f64>(
    f: &F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    rtol: f64,
    atol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = rule.integrate(f, a, m);
    let right = rule.integrate(f, m, b);
    let halves = left + right;
    if (halves - whole).abs() <= (rtol * halves.abs()).max(atol) || depth >= 40 {
        return halves;
    }
    adaptive_inner(f, rule, a, m, left, rtol, 0.5 * atol, depth + 1)
        + adaptive_inner(f, rule, m, b, right, rtol, 0.5 * atol, depth + 1)
}

/// Tensor-product Gauss rule in polar coordinates.
///
/// The radial weights already contain the Jacobian `r`, so a sum of
/// `w_r * w_theta * g(r, theta)` approximates the area integral of `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarRule {
    /// `(r, w * r)` pairs.
    pub radial: Vec<(f64, f64)>,
    /// `(theta, w)` pairs covering `[0, 2pi)`.
    pub angular: Vec<(f64, f64)>,
    pub order: usize,
    pub jacobian_applied: bool,
}

impl PolarRule {
    /// `radial_breaks` are panel boundaries in r; each panel gets `order` nodes,
    /// the circle is split into `theta_cells` panels of `order` nodes.
    pub fn new(radial_breaks: &[f64], theta_cells: usize, order: usize) -> Self {
        let rule = GaussLegendre::new(order);
        let radial = composite_nodes(&rule, radial_breaks)
            .into_iter()
            .map(|(r, w)| (r, w * r))
            .collect();
        let theta_breaks = refine_breaks(&[0.0, TAU], theta_cells.max(1));
        let angular = composite_nodes(&rule, &theta_breaks);
        Self {
            radial,
            angular,
            order,
            jacobian_applied: true,
        }
    }

    /// Rule with explicit angular panel boundaries covering `[0, 2pi]`.
    pub fn from_breaks(radial_breaks: &[f64], angular_breaks: &[f64], order: usize) -> Self {
        let rule = GaussLegendre::new(order);
        let radial = composite_nodes(&rule, radial_breaks)
            .into_iter()
            .map(|(r, w)| (r, w * r))
            .collect();
        Self {
            radial,
            angular: composite_nodes(&rule, angular_breaks),
            order,
            jacobian_applied: true,
        }
    }

    /// Cell-partitioned rule on the annulus with extra radial breaks at `cuts`.
    pub fn annulus(
        geom: &AnnulusGeometry,
        cuts: &[f64],
        radial_cells: usize,
        theta_cells: usize,
        order: usize,
    ) -> Self {
        let base = breakpoints(geom.rho, geom.outer, cuts);
        Self::new(&refine_breaks(&base, radial_cells.max(1)), theta_cells, order)
    }

    pub fn len(&self) -> usize {
        self.radial.len() * self.angular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn measure(&self) -> f64 {
        let radial: f64 = neumaier_sum(self.radial.iter().map(|&(_, w)| w));
        let angular: f64 = neumaier_sum(self.angular.iter().map(|&(_, w)| w));
        radial * angular
    }

    /// Integral of `g(r, theta)` over the covered region.
    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, g: F) -> f64 {
        neumaier_sum(self.radial.iter().map(|&(r, wr)| {
            wr * neumaier_sum(self.angular.iter().map(|&(th, wt)| wt * g(r, th)))
        }))
    }

    /// Integral of a radial function `g(r)` (angular factor `2pi` applied).
    pub fn integrate_radial<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let angular: f64 = neumaier_sum(self.angular.iter().map(|&(_, w)| w));
        angular * neumaier_sum(self.radial.iter().map(|&(r, wr)| wr * g(r)))
    }
}

/// Gauss rule in time on `[t_lo, t_hi]` split into `cells` panels.
pub fn time_nodes(t_lo: f64, t_hi: f64, cells: usize, order: usize) -> Result<Vec<(f64, f64)>> {
    if !(t_hi > t_lo) {
        return Err(Error::Parameter(format!(
            "empty time interval [{t_lo}, {t_hi}]"
        )));
    }
    let rule = GaussLegendre::new(order);
    Ok(composite_nodes(&rule, &refine_breaks(&[t_lo, t_hi], cells.max(1))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        for n in 1..=20 {
            let g = GaussLegendre::new(n);
            let wsum: f64 = g.weights.iter().sum();
            assert_relative_eq!(wsum, 2.0, epsilon = 1e-14);
            // degree 2n-1 monomial x^(2n-2) has integral 2/(2n-1)
            let deg = 2 * n - 2;
            let val = g.integrate(|x| x.powi(deg as i32), -1.0, 1.0);
            assert_relative_eq!(val, 2.0 / (deg as f64 + 1.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        let g = GaussLegendre::new(9);
        for w in g.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..9 {
            assert!((g.nodes[i] + g.nodes[8 - i]).abs() < 1e-15);
            assert!(g.weights[i] > 0.0);
        }
    }

    #[test]
    fn annulus_measure() {
        let geom = AnnulusGeometry::default();
        let rule = PolarRule::annulus(&geom, &[1.45, 1.55], 4, 8, 8);
        assert_relative_eq!(rule.measure(), geom.area(), max_relative = 1e-12);
        assert!(rule.jacobian_applied);
        for &(_, w) in rule.radial.iter().chain(rule.angular.iter()) {
            assert!(w > 0.0);
        }
    }

    #[test]
    fn adaptive_matches_closed_form() {
        let f = |s: f64| s.powi(-5);
        let v = adaptive_gauss(&f, 1.0, 2.0, 1e-13, 1e-15);
        assert_relative_eq!(v, 0.25 * (1.0 - 1.0 / 16.0), max_relative = 1e-13);
        let g = |s: f64| (10.0 * s).sin().exp();
        let v = adaptive_gauss(&g, 0.0, 3.0, 1e-12, 1e-15);
        let reference = integrate_panels(g, &refine_breaks(&[0.0, 3.0], 200), &GaussLegendre::new(12));
        assert_relative_eq!(v, reference, max_relative = 1e-11);
    }

    #[test]
    fn breakpoints_clip_and_sort() {
        let b = breakpoints(1.0, 2.0, &[1.7, 0.5, 1.2, 2.5, 1.2]);
        assert_eq!(b, vec![1.0, 1.2, 1.7, 2.0]);
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let v = neumaier_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(v, 2.0);
    }
}
