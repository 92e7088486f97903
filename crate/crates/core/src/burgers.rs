//! Rarefaction-wave solution of the reduced Burgers equation
//! `f_t + (lambda/2) (f^2)_r = 0` and a first-order Godunov finite-volume
//! oracle for it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{AnnulusGeometry, SubsolutionParams};
use crate::quadrature::GaussLegendre;

/// Largest CFL number accepted by [`godunov_step`].
pub const CFL_LIMIT: f64 = 0.9;

/// Samples of a radial function at a fixed time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub t: f64,
}

impl RadialProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, t: f64) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::Parameter(
                "profile needs at least two samples and matching lengths".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("profile grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("profile values must be finite".into()));
        }
        Ok(Self { grid, values, t })
    }

    /// Piecewise-linear interpolation, constant extrapolation outside the grid.
    pub fn interpolate(&self, r: f64) -> f64 {
        let g = &self.grid;
        if r <= g[0] {
            return self.values[0];
        }
        if r >= g[g.len() - 1] {
            return self.values[g.len() - 1];
        }
        let i = g.partition_point(|&x| x <= r) - 1;
        let s = (r - g[i]) / (g[i + 1] - g[i]);
        self.values[i] * (1.0 - s) + self.values[i + 1] * s
    }
}

/// Entropy solution for the Riemann data `-1 | +1` at `r0`.
///
/// On the fan edges the one-sided limits `-1` (left) and `+1` (right) are
/// returned; at `t = 0` the value at `r0` is `0`.
pub fn rarefaction_f(r: f64, t: f64, r0: f64, lambda: f64) -> f64 {
    if t <= 0.0 {
        return if r < r0 {
            -1.0
        } else if r > r0 {
            1.0
        } else {
            0.0
        };
    }
    let half_width = lambda * t;
    if r <= r0 - half_width {
        -1.0
    } else if r >= r0 + half_width {
        1.0
    } else {
        ((r - r0) / half_width).clamp(-1.0, 1.0)
    }
}

/// Godunov flux for the convex flux `q(f) = (lambda/2) f^2`.
fn godunov_flux(left: f64, right: f64, lambda: f64) -> f64 {
    let q = |f: f64| 0.5 * lambda * f * f;
    if left <= right {
        if left > 0.0 {
            q(left)
        } else if right < 0.0 {
            q(right)
        } else {
            0.0
        }
    } else {
        q(left).max(q(right))
    }
}

/// Cell averages on a uniform grid of `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FvState {
    pub lo: f64,
    pub hi: f64,
    pub averages: Vec<f64>,
    pub time: f64,
    pub lambda: f64,
}

impl FvState {
    /// Projects `f0` onto cell averages with an 8-point Gauss rule per cell.
    pub fn from_profile<F: Fn(f64) -> f64>(
        f0: F,
        lo: f64,
        hi: f64,
        n_cells: usize,
        lambda: f64,
    ) -> Self {
        let h = (hi - lo) / n_cells as f64;
        let rule = GaussLegendre::new(8);
        let averages = (0..n_cells)
            .map(|i| {
                // weighted mean, so bounded data stays bounded to roundoff
                let a = lo + i as f64 * h;
                let (num, den) = rule
                    .mapped(a, a + h)
                    .fold((0.0, 0.0), |(n, d), (x, w)| (n + w * f0(x), d + w));
                num / den
            })
            .collect();
        Self {
            lo,
            hi,
            averages,
            time: 0.0,
            lambda,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.averages.len()
    }

    pub fn cell_width(&self) -> f64 {
        (self.hi - self.lo) / self.n_cells() as f64
    }

    pub fn midpoints(&self) -> Vec<f64> {
        let h = self.cell_width();
        (0..self.n_cells())
            .map(|i| self.lo + (i as f64 + 0.5) * h)
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.averages.iter().sum::<f64>() * self.cell_width()
    }

    /// Largest stable step at [`CFL_LIMIT`].
    pub fn max_stable_dt(&self) -> f64 {
        let speed = self.max_speed();
        if speed == 0.0 {
            f64::INFINITY
        } else {
            CFL_LIMIT * self.cell_width() / speed
        }
    }

    fn max_speed(&self) -> f64 {
        self.lambda * self.averages.iter().fold(0.0_f64, |m, f| m.max(f.abs()))
    }

    pub fn to_profile(&self) -> RadialProfile {
        RadialProfile {
            grid: self.midpoints(),
            values: self.averages.clone(),
            t: self.time,
        }
    }
}

/// One conservative Godunov update with zero-gradient ghost cells.
pub fn godunov_step(state: &FvState, dt: f64) -> Result<FvState> {
    let h = state.cell_width();
    let cfl = state.max_speed() * dt / h;
    if cfl > CFL_LIMIT * (1.0 + 1e-12) {
        return Err(Error::Cfl {
            cfl,
            limit: CFL_LIMIT,
        });
    }
    let n = state.n_cells();
    let u = &state.averages;
    let cell = |i: isize| u[i.clamp(0, n as isize - 1) as usize];
    let fluxes: Vec<f64> = (0..=n as isize)
        .map(|k| godunov_flux(cell(k - 1), cell(k), state.lambda))
        .collect();
    let ratio = dt / h;
    let averages = (0..n)
        .map(|i| u[i] - ratio * (fluxes[i + 1] - fluxes[i]))
        .collect();
    Ok(FvState {
        averages,
        time: state.time + dt,
        ..state.clone()
    })
}

/// Evolves `f0` to `t_end` with steps at the CFL limit (last step shortened).
pub fn godunov_solve<F: Fn(f64) -> f64>(
    f0: F,
    lo: f64,
    hi: f64,
    lambda: f64,
    t_end: f64,
    n_cells: usize,
) -> Result<RadialProfile> {
    let mut state = FvState::from_profile(f0, lo, hi, n_cells, lambda);
    if state.averages.iter().any(|v| v.abs() > 1.0 + 1e-12) {
        return Err(Error::Parameter("initial data must lie in [-1, 1]".into()));
    }
    while state.time < t_end {
        let remaining = t_end - state.time;
        let dt = state.max_stable_dt().min(remaining);
        let mut next = godunov_step(&state, dt)?;
        if remaining - dt <= 1e-14 * t_end.max(1.0) {
            next.time = t_end;
        }
        state = next;
    }
    Ok(state.to_profile())
}

/// Godunov-vs-exact errors on one mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FvComparison {
    pub n_cells: usize,
    pub h: f64,
    pub l1_error: f64,
    /// Max error excluding the two cells on each side of each fan edge.
    pub linf_error: f64,
    pub min_value: f64,
    pub max_value: f64,
}

pub fn compare_exact_vs_fv(
    geom: &AnnulusGeometry,
    params: &SubsolutionParams,
    t: f64,
    n_cells: usize,
) -> Result<FvComparison> {
    let (r0, lam) = (geom.r0, params.lambda);
    let profile = godunov_solve(
        |r| rarefaction_f(r, 0.0, r0, lam),
        geom.rho,
        geom.outer,
        lam,
        t,
        n_cells,
    )?;
    let h = (geom.outer - geom.rho) / n_cells as f64;
    let edge_cell = |x: f64| ((x - geom.rho) / h).floor() as isize;
    let left_edge = edge_cell(r0 - lam * t);
    let right_edge = edge_cell(r0 + lam * t);
    let near_edge = |i: isize| (i - left_edge).abs() <= 2 || (i - right_edge).abs() <= 2;

    let mut l1 = 0.0;
    let mut linf: f64 = 0.0;
    for (i, (&r, &v)) in profile.grid.iter().zip(&profile.values).enumerate() {
        let err = (v - rarefaction_f(r, t, r0, lam)).abs();
        l1 += h * err;
        if !near_edge(i as isize) {
            linf = linf.max(err);
        }
    }
    let (min_value, max_value) = profile
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    Ok(FvComparison {
        n_cells,
        h,
        l1_error: l1,
        linf_error: linf,
        min_value,
        max_value,
    })
}

/// Mesh-doubling study starting from `n_start` cells.
pub fn convergence_study(
    geom: &AnnulusGeometry,
    params: &SubsolutionParams,
    t: f64,
    n_start: usize,
    levels: usize,
) -> Result<Vec<FvComparison>> {
    (0..levels)
        .map(|k| compare_exact_vs_fv(geom, params, t, n_start << k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rarefaction_examples() {
        assert_eq!(rarefaction_f(1.2, 0.5, 1.5, 0.1), -1.0);
        assert_eq!(rarefaction_f(1.5, 0.4, 1.5, 0.1), 0.0);
        assert_abs_diff_eq!(rarefaction_f(1.48, 0.5, 1.5, 0.1), -0.4, epsilon = 1e-12);
        assert_eq!(rarefaction_f(1.45, 0.5, 1.5, 0.1), -1.0);
        assert_eq!(rarefaction_f(1.55, 0.5, 1.5, 0.1), 1.0);
        assert_eq!(rarefaction_f(1.4, 0.0, 1.5, 0.1), -1.0);
        assert_eq!(rarefaction_f(1.6, 0.0, 1.5, 0.1), 1.0);
    }

    #[test]
    fn flux_cases() {
        // transonic rarefaction takes the sonic value
        assert_eq!(godunov_flux(-1.0, 1.0, 0.2), 0.0);
        assert_abs_diff_eq!(godunov_flux(1.0, -1.0, 0.2), 0.1);
        assert_abs_diff_eq!(godunov_flux(0.5, 1.0, 0.2), 0.025);
        assert_abs_diff_eq!(godunov_flux(-1.0, -0.5, 0.2), 0.025);
    }

    #[test]
    fn constant_state_is_stationary() {
        let mut s = FvState::from_profile(|_| 1.0, 1.0, 2.0, 64, 0.1);
        for _ in 0..50 {
            s = godunov_step(&s, s.max_stable_dt()).unwrap();
        }
        assert!(s.averages.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn conservation_over_many_steps() {
        let mut s = FvState::from_profile(|r| rarefaction_f(r, 0.0, 1.5, 0.1), 1.0, 2.0, 400, 0.1);
        let before: f64 = s.averages.iter().sum();
        let dt = 0.5 * s.max_stable_dt();
        for _ in 0..100 {
            s = godunov_step(&s, dt).unwrap();
        }
        let after: f64 = s.averages.iter().sum();
        assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn cfl_violation_rejected() {
        let s = FvState::from_profile(|_| 1.0, 1.0, 2.0, 10, 1.0);
        let err = godunov_step(&s, 1.0).unwrap_err();
        assert!(matches!(err, Error::Cfl { .. }));
    }

    #[test]
    fn initial_projection_error_bound() {
        let g = AnnulusGeometry {
            r0: 1.5037,
            ..AnnulusGeometry::default()
        };
        let p = SubsolutionParams::default();
        let c = compare_exact_vs_fv(&g, &p, 0.0, 100).unwrap();
        assert!(c.l1_error <= 2.0 * c.h + 1e-15);
    }

    #[test]
    fn fan_width_scales_with_lambda() {
        let width = |lam: f64| {
            let grid: Vec<f64> = (0..=10_000).map(|i| 1.0 + i as f64 * 1e-4).collect();
            grid.iter()
                .filter(|&&r| rarefaction_f(r, 0.5, 1.5, lam).abs() < 1.0)
                .count() as f64
                * 1e-4
        };
        assert_abs_diff_eq!(width(0.1), 0.1, epsilon = 2e-4);
        assert_abs_diff_eq!(width(0.05), 0.05, epsilon = 2e-4);
    }

    #[test]
    fn profile_rejects_unsorted_grid() {
        assert!(RadialProfile::new(vec![1.0, 1.0], vec![0.0, 0.0], 0.0).is_err());
        let p = RadialProfile::new(vec![1.0, 2.0], vec![0.0, 2.0], 0.0).unwrap();
        assert_abs_diff_eq!(p.interpolate(1.25), 0.5);
    }
}
