//! The rotational subsolution `(vbar, ubar, qbar)` driven by the Burgers
//! rarefaction, its prescribed energy density `ebar`, and the generalized
//! energy `e(vbar, ubar)`.
//!
//! With `alpha = f / r^2`, `beta = -alpha^2 / 2` and
//! `gamma = -(lambda/2)(1/r^2 - r^2 alpha^2)` the fields are
//!
//! ```text
//! vbar = alpha (sin θ, -cos θ)
//! ubar = [[β cos2θ + γ sin2θ,  β sin2θ - γ cos2θ],
//!         [β sin2θ - γ cos2θ, -β cos2θ - γ sin2θ]]
//! qbar = alpha^2 / 2 + ∫_rho^r alpha(s)^2 / s ds
//! ```

use rayon::prelude::*;
use serde::Serialize;

use crate::burgers::rarefaction_f;
use crate::error::{Error, Result};
use crate::geometry::{cartesian_to_polar, AnnulusGeometry, SubsolutionParams};
use crate::linalg::Sym2;
use crate::quadrature::{adaptive_gauss, breakpoints};

/// Relative tolerance of the pressure integral.
pub const PRESSURE_RTOL: f64 = 1e-13;

/// Gap below which `egen` and `ebar` count as equal outside the fan.
pub const EQUALITY_TOL: f64 = 1e-13;

/// Radial profiles at one `(r, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialComponents {
    pub f: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub qbar: f64,
}

/// The open band `r0 - lambda t < |x| < r0 + lambda t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurbulentRegion {
    pub r0: f64,
    pub lambda: f64,
}

impl TurbulentRegion {
    pub fn edges(&self, t: f64) -> (f64, f64) {
        let w = self.lambda * t.max(0.0);
        (self.r0 - w, self.r0 + w)
    }

    pub fn contains(&self, r: f64, t: f64) -> bool {
        let (lo, hi) = self.edges(t);
        lo < r && r < hi
    }

    /// Distance from `r` to the nearer fan edge at time `t`.
    pub fn edge_distance(&self, r: f64, t: f64) -> f64 {
        let (lo, hi) = self.edges(t);
        (r - lo).abs().min((r - hi).abs())
    }
}

/// Every field of the subsolution at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubsolutionSample {
    pub x: [f64; 2],
    pub r: f64,
    pub theta: f64,
    pub t: f64,
    pub components: RadialComponents,
    pub vbar: [f64; 2],
    pub ubar: Sym2,
    pub ebar: f64,
    pub egen: f64,
    pub in_region: bool,
}

/// The subsolution for fixed geometry and parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subsolution {
    pub geom: AnnulusGeometry,
    pub params: SubsolutionParams,
}

impl Subsolution {
    /// Requires a valid geometry, `lambda > 0` and `epsilon >= 0`; the
    /// admissibility bounds themselves are checked by
    /// [`crate::geometry::validate_params`].
    pub fn new(geom: AnnulusGeometry, params: SubsolutionParams) -> Result<Self> {
        geom.check()?;
        if !(params.lambda > 0.0 && params.lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda={} must be positive", params.lambda)));
        }
        if !(params.epsilon >= 0.0 && params.epsilon.is_finite()) {
            return Err(Error::Parameter(format!(
                "epsilon={} must be non-negative",
                params.epsilon
            )));
        }
        Ok(Self { geom, params })
    }

    pub fn region(&self) -> TurbulentRegion {
        TurbulentRegion {
            r0: self.geom.r0,
            lambda: self.params.lambda,
        }
    }

    pub fn f(&self, r: f64, t: f64) -> f64 {
        rarefaction_f(r, t, self.geom.r0, self.params.lambda)
    }

    pub fn alpha(&self, r: f64, t: f64) -> f64 {
        self.f(r, t) / (r * r)
    }

    /// Initial swirl: `-1/r^2` inside `r0`, `+1/r^2` outside.
    pub fn alpha0(&self, r: f64) -> f64 {
        self.alpha(r, 0.0)
    }

    pub fn beta(&self, r: f64, t: f64) -> f64 {
        let a = self.alpha(r, t);
        -0.5 * a * a
    }

    pub fn gamma(&self, r: f64, t: f64) -> f64 {
        let f = self.f(r, t);
        -0.5 * self.params.lambda / (r * r) * (1.0 - f * f)
    }

    /// `qbar(r, t)` with the time-frozen swirl in the pressure integral.
    pub fn qbar(&self, r: f64, t: f64) -> f64 {
        let a = self.alpha(r, t);
        0.5 * a * a + self.pressure_integral(r, t)
    }

    /// `∫_rho^r alpha(s, t)^2 / s ds`, panels split at the fan edges.
    pub fn pressure_integral(&self, r: f64, t: f64) -> f64 {
        let rho = self.geom.rho;
        if r <= rho {
            return 0.0;
        }
        let (lo, hi) = self.region().edges(t);
        let integrand = |s: f64| {
            let a = self.alpha(s, t);
            a * a / s
        };
        breakpoints(rho, r, &[lo, hi])
            .windows(2)
            .map(|w| adaptive_gauss(&integrand, w[0], w[1], PRESSURE_RTOL, 1e-17))
            .sum()
    }

    pub fn components(&self, r: f64, t: f64) -> RadialComponents {
        let f = self.f(r, t);
        let alpha = f / (r * r);
        RadialComponents {
            f,
            alpha,
            beta: -0.5 * alpha * alpha,
            gamma: -0.5 * self.params.lambda / (r * r) * (1.0 - f * f),
            qbar: self.qbar(r, t),
        }
    }

    pub fn vbar(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let p = cartesian_to_polar(x);
        self.vbar_polar(p.r, p.theta, t)
    }

    pub fn vbar_polar(&self, r: f64, theta: f64, t: f64) -> [f64; 2] {
        let a = self.alpha(r, t);
        let (s, c) = theta.sin_cos();
        [a * s, -a * c]
    }

    /// Initial velocity `∓ x^⊥ / |x|^3` with `x^⊥ = (x2, -x1)`.
    pub fn v0(&self, x: [f64; 2]) -> [f64; 2] {
        let r = x[0].hypot(x[1]);
        let sign = if r < self.geom.r0 {
            -1.0
        } else if r > self.geom.r0 {
            1.0
        } else {
            0.0
        };
        let r3 = r * r * r;
        [sign * x[1] / r3, -sign * x[0] / r3]
    }

    pub fn ubar(&self, x: [f64; 2], t: f64) -> Sym2 {
        let p = cartesian_to_polar(x);
        self.ubar_polar(p.r, p.theta, t)
    }

    pub fn ubar_polar(&self, r: f64, theta: f64, t: f64) -> Sym2 {
        ubar_from(self.beta(r, t), self.gamma(r, t), theta)
    }

    /// Generalized energy density, closed form in `(r, t)`.
    pub fn egen(&self, r: f64, t: f64) -> f64 {
        let f = self.f(r, t);
        let r2 = r * r;
        (1.0 - (1.0 - r2 * self.params.lambda) * (1.0 - f * f)) / (2.0 * r2 * r2)
    }

    /// Prescribed energy density.
    pub fn ebar(&self, r: f64, t: f64) -> f64 {
        let f = self.f(r, t);
        let r2 = r * r;
        (1.0 - self.params.epsilon * (1.0 - r2 * self.params.lambda) * (1.0 - f * f))
            / (2.0 * r2 * r2)
    }

    /// `(1 - eps)(1 - r^2 lambda)(1 - f^2) / (2 r^4)`.
    pub fn margin_formula(&self, r: f64, t: f64) -> f64 {
        let f = self.f(r, t);
        let r2 = r * r;
        (1.0 - self.params.epsilon) * (1.0 - r2 * self.params.lambda) * (1.0 - f * f)
            / (2.0 * r2 * r2)
    }

    pub fn sample(&self, x: [f64; 2], t: f64) -> SubsolutionSample {
        let p = cartesian_to_polar(x);
        let components = self.components(p.r, t);
        SubsolutionSample {
            x,
            r: p.r,
            theta: p.theta,
            t,
            components,
            vbar: self.vbar_polar(p.r, p.theta, t),
            ubar: ubar_from(components.beta, components.gamma, p.theta),
            ebar: self.ebar(p.r, t),
            egen: self.egen(p.r, t),
            in_region: self.region().contains(p.r, t),
        }
    }
}

/// `R(θ) diag-form R(θ)` with the reflection `R = [[cos, sin], [sin, -cos]]`.
pub fn ubar_from(beta: f64, gamma: f64, theta: f64) -> Sym2 {
    let (s2, c2) = (2.0 * theta).sin_cos();
    let a = beta * c2 + gamma * s2;
    Sym2::new(a, beta * s2 - gamma * c2, -a)
}

/// `(d/2) λ_max(v ⊗ v - u)` with `d = 2`, evaluated from the matrices.
pub fn generalized_energy(vbar: [f64; 2], ubar: Sym2) -> f64 {
    (Sym2::outer(vbar) - ubar).max_eigenvalue()
}

/// Sampling grid for the constraint check: radial cell midpoints of
/// `radial_range`, uniform angles, and `n_t` times spanning `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub n_t: usize,
    /// Sub-annulus `(rho', R')`; `None` means the whole annulus.
    pub radial_range: Option<(f64, f64)>,
}

impl SampleGrid {
    pub fn new(n_r: usize, n_theta: usize, n_t: usize) -> Self {
        Self {
            n_r,
            n_theta,
            n_t,
            radial_range: None,
        }
    }

    pub fn restricted(self, inner: f64, outer: f64) -> Self {
        Self {
            radial_range: Some((inner, outer)),
            ..self
        }
    }

    pub fn radii(&self, geom: &AnnulusGeometry) -> Vec<f64> {
        let (a, b) = self.radial_range.unwrap_or((geom.rho, geom.outer));
        let h = (b - a) / self.n_r as f64;
        (0..self.n_r).map(|i| a + (i as f64 + 0.5) * h).collect()
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n_theta)
            .map(|j| std::f64::consts::TAU * j as f64 / self.n_theta as f64)
            .collect()
    }

    pub fn times(&self, geom: &AnnulusGeometry) -> Vec<f64> {
        if self.n_t <= 1 {
            return vec![0.0];
        }
        (0..self.n_t)
            .map(|k| geom.horizon * k as f64 / (self.n_t - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `egen >= ebar` inside the turbulent region.
    NotStrictInRegion,
    /// `|egen - ebar| >= EQUALITY_TOL` outside the closed region.
    GapOutsideRegion,
    /// `egen > ebar`.
    EnergyExceeded,
    /// `|vbar|^2/2 > egen` or `ebar > 1/(2 r^4)`.
    OrderingBroken,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintViolation {
    pub kind: ViolationKind,
    pub r: f64,
    pub theta: f64,
    pub t: f64,
    pub egen: f64,
    pub ebar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub radial_range: (f64, f64),
    pub n_samples: usize,
    pub n_in_region: usize,
    /// Smallest `ebar - egen` over samples in the region.
    pub min_margin_in_region: Option<f64>,
    /// Largest `|(ebar - egen) - margin_formula|` over all samples.
    pub max_margin_formula_error: f64,
    /// Largest `|egen - ebar|` outside the closed region.
    pub max_gap_outside: f64,
    /// Largest `egen - ebar` over all samples.
    pub max_excess: f64,
    /// `epsilon < 1`; without it the inequality in the region cannot be strict.
    pub strict_epsilon: bool,
    pub strict_in_region: bool,
    pub equality_outside: bool,
    pub ordering_holds: bool,
    pub first_violation: Option<ConstraintViolation>,
}

impl ConstraintReport {
    /// `egen <= ebar` everywhere with equality outside the region; strictness
    /// in the region is required only when `epsilon < 1`.
    pub fn passed(&self) -> bool {
        let base = self.equality_outside && self.ordering_holds && self.max_excess <= 0.0;
        if self.strict_epsilon {
            base && self.strict_in_region
        } else {
            base
        }
    }
}

#[derive(Debug, Default)]
struct SliceStats {
    n_samples: usize,
    n_in_region: usize,
    min_margin: Option<f64>,
    max_formula_err: f64,
    max_gap_outside: f64,
    max_excess: f64,
    strict: bool,
    equality: bool,
    ordering: bool,
    first: Option<ConstraintViolation>,
}

pub fn check_constraint_structure(sub: &Subsolution, grid: &SampleGrid) -> ConstraintReport {
    let geom = &sub.geom;
    let radii = grid.radii(geom);
    let angles = grid.angles();
    let times = grid.times(geom);
    let region = sub.region();
    let strict = sub_strict(sub);

    let slices: Vec<SliceStats> = times
        .par_iter()
        .map(|&t| {
            let mut st = SliceStats {
                max_excess: f64::NEG_INFINITY,
                strict: true,
                equality: true,
                ordering: true,
                ..Default::default()
            };
            let (lo, hi) = region.edges(t);
            for &r in &radii {
                let egen = sub.egen(r, t);
                let ebar = sub.ebar(r, t);
                let margin = ebar - egen;
                let formula_err = (margin - sub.margin_formula(r, t)).abs();
                let in_region = region.contains(r, t);
                let outside_closure = r < lo || r > hi;
                let bound = 0.5 / (r * r * r * r);
                for &th in &angles {
                    st.n_samples += 1;
                    let v = sub.vbar_polar(r, th, t);
                    let kinetic = 0.5 * (v[0] * v[0] + v[1] * v[1]);
                    st.max_formula_err = st.max_formula_err.max(formula_err);
                    st.max_excess = st.max_excess.max(egen - ebar);
                    let mut kinds: [Option<ViolationKind>; 4] = [None; 4];
                    if in_region {
                        st.n_in_region += 1;
                        st.min_margin = Some(st.min_margin.map_or(margin, |m: f64| m.min(margin)));
                        if margin <= 0.0 {
                            st.strict = false;
                            // with epsilon >= 1 this is the documented flag, not a failure
                            if strict {
                                kinds[0] = Some(ViolationKind::NotStrictInRegion);
                            }
                        }
                    } else if outside_closure {
                        let gap = (egen - ebar).abs();
                        st.max_gap_outside = st.max_gap_outside.max(gap);
                        if gap >= EQUALITY_TOL {
                            st.equality = false;
                            kinds[1] = Some(ViolationKind::GapOutsideRegion);
                        }
                    }
                    if egen - ebar > 0.0 {
                        kinds[2] = Some(ViolationKind::EnergyExceeded);
                    }
                    let tol = 1e-15 * bound;
                    if kinetic > egen + tol || ebar > bound + tol {
                        st.ordering = false;
                        kinds[3] = Some(ViolationKind::OrderingBroken);
                    }
                    if st.first.is_none() {
                        if let Some(kind) = kinds.into_iter().flatten().next() {
                            st.first = Some(ConstraintViolation {
                                kind,
                                r,
                                theta: th,
                                t,
                                egen,
                                ebar,
                            });
                        }
                    }
                }
            }
            st
        })
        .collect();

    let mut report = ConstraintReport {
        radial_range: grid.radial_range.unwrap_or((geom.rho, geom.outer)),
        n_samples: 0,
        n_in_region: 0,
        min_margin_in_region: None,
        max_margin_formula_error: 0.0,
        max_gap_outside: 0.0,
        max_excess: f64::NEG_INFINITY,
        strict_epsilon: sub_strict(sub),
        strict_in_region: true,
        equality_outside: true,
        ordering_holds: true,
        first_violation: None,
    };
    for st in slices {
        report.n_samples += st.n_samples;
        report.n_in_region += st.n_in_region;
        report.min_margin_in_region = match (report.min_margin_in_region, st.min_margin) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        report.max_margin_formula_error = report.max_margin_formula_error.max(st.max_formula_err);
        report.max_gap_outside = report.max_gap_outside.max(st.max_gap_outside);
        report.max_excess = report.max_excess.max(st.max_excess);
        report.strict_in_region &= st.strict;
        report.equality_outside &= st.equality;
        report.ordering_holds &= st.ordering;
        if report.first_violation.is_none() {
            report.first_violation = st.first;
        }
    }
    report
}

fn sub_strict(sub: &Subsolution) -> bool {
    sub.params.epsilon < 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn default_sub() -> Subsolution {
        Subsolution::new(AnnulusGeometry::default(), SubsolutionParams::default()).unwrap()
    }

    #[test]
    fn alpha_examples() {
        let s = default_sub();
        assert_abs_diff_eq!(s.alpha(1.2, 0.0), -1.0 / 1.44, epsilon = 1e-15);
        assert!((s.alpha(1.2, 0.0) + 0.694444).abs() < 1e-6);
        assert_eq!(s.alpha(1.5, 0.4), 0.0);
        assert_abs_diff_eq!(s.alpha(2.0, 0.0), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn vbar_examples_match_initial_velocity() {
        let s = default_sub();
        let v = s.vbar([1.2, 0.0], 0.0);
        assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 1.0 / 1.44, epsilon = 1e-14);
        let v = s.vbar([0.0, 2.0], 0.0);
        assert_abs_diff_eq!(v[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 0.0, epsilon = 1e-15);
        for &x in &[[1.1, 0.4], [-1.7, 0.2], [0.3, -1.9], [1.3, 1.0]] {
            let a = s.vbar(x, 0.0);
            let b = s.v0(x);
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-14);
            assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-14);
        }
        let th: f64 = 0.77;
        let v = s.vbar([1.5 * th.cos(), 1.5 * th.sin()], 0.3);
        assert!(v[0].abs() < 1e-14 && v[1].abs() < 1e-14);
    }

    #[test]
    fn ubar_at_zero_angle() {
        let s = default_sub();
        let (r, t) = (1.48, 0.5);
        let u = s.ubar([r, 0.0], t);
        let (b, g) = (s.beta(r, t), s.gamma(r, t));
        assert_abs_diff_eq!(u.a, b, epsilon = 1e-15);
        assert_abs_diff_eq!(u.b, -g, epsilon = 1e-15);
        assert_abs_diff_eq!(u.c, -b, epsilon = 1e-15);
        assert_eq!(u.trace(), 0.0);
    }

    #[test]
    fn ubar_outside_fan_has_no_gamma() {
        let s = default_sub();
        let r = 1.2;
        assert_eq!(s.gamma(r, 0.5), 0.0);
        assert_abs_diff_eq!(s.beta(r, 0.5), -0.5 / r.powi(4), epsilon = 1e-15);
    }

    #[test]
    fn ubar_conjugation_form() {
        // the reflection-conjugation and the expanded double-angle form agree
        let (b, g, th) = (-0.3_f64, 0.12_f64, 1.1_f64);
        let (s, c) = th.sin_cos();
        let q = [[c, s], [s, -c]];
        let m = [[b, g], [g, -b]];
        let mut full = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        full[i][j] += q[i][k] * m[k][l] * q[l][j];
                    }
                }
            }
        }
        let u = ubar_from(b, g, th);
        assert_abs_diff_eq!(u.a, full[0][0], epsilon = 1e-15);
        assert_abs_diff_eq!(u.b, full[0][1], epsilon = 1e-15);
        assert_abs_diff_eq!(u.c, full[1][1], epsilon = 1e-15);
    }

    #[test]
    fn qbar_examples() {
        let s = default_sub();
        assert_abs_diff_eq!(s.qbar(1.0, 0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.qbar(2.0, 0.0), 0.265625, epsilon = 1e-13);
    }

    #[test]
    fn egen_examples() {
        let s = default_sub();
        assert_abs_diff_eq!(s.egen(1.0, 0.3), 0.5, epsilon = 1e-15);
        // fan center at t > 0
        assert_abs_diff_eq!(s.egen(1.5, 0.4), 0.225 / 10.125, epsilon = 1e-15);
        assert!((s.egen(1.5, 0.4) - 0.0222222).abs() < 1e-7);
    }

    #[test]
    fn ebar_examples() {
        let s = default_sub();
        assert_abs_diff_eq!(s.ebar(1.5, 0.4), 0.6125 / 10.125, epsilon = 1e-15);
        assert!((s.ebar(1.5, 0.4) - 0.0604938).abs() < 1e-7);
        assert_abs_diff_eq!(s.ebar(1.2, 0.5), 0.5 / 1.2_f64.powi(4), epsilon = 1e-15);
        let s0 = Subsolution::new(
            AnnulusGeometry::default(),
            SubsolutionParams {
                lambda: 0.1,
                epsilon: 0.0,
            },
        )
        .unwrap();
        for &r in &[1.1, 1.47, 1.5, 1.53, 1.9] {
            assert_abs_diff_eq!(s0.ebar(r, 0.5), 0.5 / r.powi(4), epsilon = 1e-15);
        }
    }

    #[test]
    fn turbulent_region_membership() {
        let s = default_sub();
        let u = s.region();
        assert!(!u.contains(1.5, 0.0));
        assert!(u.contains(1.5, 0.2));
        assert!(!u.contains(1.45, 0.5));
        assert!(u.contains(1.46, 0.5));
        let (lo, hi) = u.edges(s.geom.horizon);
        assert!(lo > s.geom.rho && hi < s.geom.outer);
    }

    #[test]
    fn constraint_report_on_default_data() {
        let s = default_sub();
        let rep = check_constraint_structure(&s, &SampleGrid::new(40, 8, 6));
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.n_in_region > 0);
        assert!(rep.min_margin_in_region.unwrap() > 0.0);
        assert!(rep.max_margin_formula_error < 1e-15);
    }

    #[test]
    fn constraint_report_at_initial_time_is_equality() {
        let s = default_sub();
        let rep = check_constraint_structure(&s, &SampleGrid::new(40, 8, 1));
        assert_eq!(rep.n_in_region, 0);
        assert_eq!(rep.max_gap_outside, 0.0);
        assert!(rep.passed());
    }

    #[test]
    fn sub_annulus_restriction() {
        let s = default_sub();
        let rep = check_constraint_structure(&s, &SampleGrid::new(30, 8, 6).restricted(1.0, 1.5));
        assert_eq!(rep.radial_range, (1.0, 1.5));
        assert!(rep.passed());
        assert!(rep.n_in_region > 0);
    }

    #[test]
    fn epsilon_above_one_flagged_and_reported() {
        let s = Subsolution::new(
            AnnulusGeometry::default(),
            SubsolutionParams {
                lambda: 0.1,
                epsilon: 1.05,
            },
        )
        .unwrap();
        let rep = check_constraint_structure(&s, &SampleGrid::new(40, 4, 6));
        assert!(!rep.strict_epsilon);
        assert!(!rep.passed());
        let v = rep.first_violation.unwrap();
        assert_eq!(v.kind, ViolationKind::EnergyExceeded);
        assert!(v.egen > v.ebar);
    }

    #[test]
    fn epsilon_exactly_one_is_equality_everywhere() {
        let s = Subsolution::new(
            AnnulusGeometry::default(),
            SubsolutionParams {
                lambda: 0.1,
                epsilon: 1.0,
            },
        )
        .unwrap();
        let rep = check_constraint_structure(&s, &SampleGrid::new(40, 4, 6));
        assert!(!rep.strict_in_region);
        assert!(rep.first_violation.is_none());
        assert!(rep.passed());
    }

    #[test]
    fn vbar_outer_product_spectrum() {
        let s = default_sub();
        for &(r, th, t) in &[(1.2_f64, 0.3_f64, 0.0), (1.48, 2.0, 0.5), (1.9, 5.0, 0.9)] {
            let v = s.vbar_polar(r, th, t);
            let a = s.alpha(r, t);
            let (hi, lo) = Sym2::outer(v).eigenvalues();
            assert_abs_diff_eq!(hi, a * a, epsilon = 1e-15);
            assert_abs_diff_eq!(lo, 0.0, epsilon = 1e-15);
            // rotated diagonal form diag(0, alpha^2)
            let q = [[th.cos(), th.sin()], [th.sin(), -th.cos()]];
            let expected = Sym2::new(q[0][1] * q[0][1] * a * a, q[0][1] * q[1][1] * a * a, q[1][1] * q[1][1] * a * a);
            let m = Sym2::outer(v);
            assert_abs_diff_eq!(m.a, expected.a, epsilon = 1e-15);
            assert_abs_diff_eq!(m.b, expected.b, epsilon = 1e-15);
            assert_abs_diff_eq!(m.c, expected.c, epsilon = 1e-15);
        }
        let _ = PI;
    }
}
