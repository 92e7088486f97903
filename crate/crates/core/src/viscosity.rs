//! Radial reduction of Navier-Stokes for rotational data,
//! `∂t α = ν (∂r² α + ∂r α / r − α / r²)` with `α = 0` on both circles, and
//! the vanishing-viscosity study towards the stationary Euler solution.
//!
//! The spatial operator is discretized in conservative form,
//! `(1/(r_i h̄_i)) [r_{i+½} Δ_{i+½} a / h_{i+½} − r_{i−½} Δ_{i−½} a / h_{i−½}] − a_i / r_i²`,
//! which reduces to the centered second-order stencil on a uniform grid and
//! is symmetric for the weights `2π r_i h̄_i`. Crank-Nicolson time stepping
//! then satisfies a discrete energy equality exactly.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::burgers::RadialProfile;
use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::geometry::AnnulusGeometry;
use crate::linalg::solve_tridiagonal;
use crate::quadrature::{adaptive_gauss, neumaier_sum};

/// Default upper bound on the time step.
pub const DEFAULT_DT: f64 = 1e-3;

pub type RadialSource = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type RadialData = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Nodes `rho = r_0 < ... < r_N = R`, uniform on each side of an optional
/// interior node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn uniform(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        if n_cells < 2 || !(b > a) {
            return Err(Error::Parameter(format!(
                "grid needs b > a and at least 2 cells, got [{a}, {b}] with {n_cells}"
            )));
        }
        let h = (b - a) / n_cells as f64;
        let mut nodes: Vec<f64> = (0..n_cells).map(|i| a + h * i as f64).collect();
        nodes.push(b);
        Ok(Self { nodes })
    }

    /// Piecewise-uniform grid with `node` as a grid point; the two pieces get
    /// cell counts proportional to their lengths.
    pub fn with_node(a: f64, b: f64, node: f64, n_cells: usize) -> Result<Self> {
        if !(node > a && node < b) {
            return Err(Error::Parameter(format!("node {node} not inside ({a}, {b})")));
        }
        let n1 = ((n_cells as f64 * (node - a) / (b - a)).round() as usize).max(1);
        let n2 = n_cells.saturating_sub(n1).max(1);
        let left = Self::uniform(a, node, n1.max(2))?;
        let right = Self::uniform(node, b, n2.max(2))?;
        let mut nodes = left.nodes;
        nodes.extend_from_slice(&right.nodes[1..]);
        Ok(Self { nodes })
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Interior weights `2π r_i h̄_i`, zero at the two boundary nodes.
    pub fn weights(&self) -> Vec<f64> {
        let r = &self.nodes;
        let n = r.len();
        (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    0.0
                } else {
                    TAU * r[i] * 0.5 * (r[i + 1] - r[i - 1])
                }
            })
            .collect()
    }
}

/// Off-diagonals and diagonal of the discrete operator on the interior nodes.
#[derive(Debug, Clone)]
struct Stencil {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Stencil {
    fn new(grid: &RadialGrid) -> Self {
        let r = &grid.nodes;
        let m = r.len() - 2;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for k in 0..m {
            let i = k + 1;
            let hm = r[i] - r[i - 1];
            let hp = r[i + 1] - r[i];
            let hbar = 0.5 * (hm + hp);
            let l = 0.5 * (r[i] + r[i - 1]) / (hm * r[i] * hbar);
            let u = 0.5 * (r[i] + r[i + 1]) / (hp * r[i] * hbar);
            lower[k] = l;
            upper[k] = u;
            diag[k] = -(l + u) - 1.0 / (r[i] * r[i]);
        }
        Self { lower, diag, upper }
    }

    fn apply(&self, a: &[f64], out: &mut [f64]) {
        let m = a.len();
        for k in 0..m {
            let mut v = self.diag[k] * a[k];
            if k > 0 {
                v += self.lower[k] * a[k - 1];
            }
            if k + 1 < m {
                v += self.upper[k] * a[k + 1];
            }
            out[k] = v;
        }
    }
}

/// Radial viscous problem on `[rho, R]` with zero Dirichlet data.
#[derive(Clone)]
pub struct ParabolicProblem {
    pub geom: AnnulusGeometry,
    pub nu: f64,
    pub grid: RadialGrid,
    pub dt: f64,
    pub initial: RadialData,
    pub source: Option<RadialSource>,
}

impl fmt::Debug for ParabolicProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParabolicProblem")
            .field("geom", &self.geom)
            .field("nu", &self.nu)
            .field("n_cells", &self.grid.n_cells())
            .field("dt", &self.dt)
            .field("source", &self.source.is_some())
            .finish()
    }
}

/// Swirl of the rotational initial datum, `0` exactly at `r0`.
pub fn rotational_alpha0(geom: &AnnulusGeometry) -> RadialData {
    let r0 = geom.r0;
    Arc::new(move |r: f64| {
        let s = if r < r0 {
            -1.0
        } else if r > r0 {
            1.0
        } else {
            0.0
        };
        s / (r * r)
    })
}

impl ParabolicProblem {
    /// Rotational initial datum on a grid with a node at `r0`. The step is
    /// `min(DEFAULT_DT, positivity limit)`, so the discrete maximum principle holds.
    pub fn rotational(geom: AnnulusGeometry, nu: f64, n_cells: usize) -> Result<Self> {
        geom.check()?;
        check_nu(nu)?;
        let grid = RadialGrid::with_node(geom.rho, geom.outer, geom.r0, n_cells)?;
        let mut p = Self {
            geom,
            nu,
            grid,
            dt: DEFAULT_DT,
            initial: rotational_alpha0(&geom),
            source: None,
        };
        p.dt = p.dt.min(p.positivity_dt());
        Ok(p)
    }

    /// Arbitrary initial profile and source on a uniform grid, fixed step `dt`.
    pub fn custom(
        geom: AnnulusGeometry,
        nu: f64,
        n_cells: usize,
        dt: f64,
        initial: RadialData,
        source: Option<RadialSource>,
    ) -> Result<Self> {
        geom.check()?;
        check_nu(nu)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!("time step {dt} must be positive")));
        }
        Ok(Self {
            geom,
            nu,
            grid: RadialGrid::uniform(geom.rho, geom.outer, n_cells)?,
            dt,
            initial,
            source,
        })
    }

    /// Largest step for which the explicit half of Crank-Nicolson has
    /// non-negative coefficients.
    pub fn positivity_dt(&self) -> f64 {
        let s = Stencil::new(&self.grid);
        let worst = s.diag.iter().fold(0.0_f64, |m, d| m.max(-d));
        2.0 / (self.nu * worst)
    }

    fn initial_interior(&self) -> Vec<f64> {
        let r = &self.grid.nodes;
        r[1..r.len() - 1].iter().map(|&x| (self.initial)(x)).collect()
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Parameter(format!(
            "viscosity {nu} must be positive; the inviscid limit is reached by sweeping"
        )));
    }
    Ok(())
}

/// `(1/2) Σ w_i a_i²` over interior nodes.
fn half_norm_sq(weights: &[f64], interior: &[f64]) -> f64 {
    0.5 * neumaier_sum(interior.iter().zip(&weights[1..]).map(|(a, w)| w * a * a))
}

/// Discrete dissipation `2π [Σ r_{i+½} (Δa)² / h + Σ h̄_i a_i² / r_i]` with
/// zero boundary values.
fn dissipation(grid: &RadialGrid, interior: &[f64]) -> f64 {
    let r = &grid.nodes;
    let n = r.len();
    let full = |i: usize| if i == 0 || i == n - 1 { 0.0 } else { interior[i - 1] };
    let grad = neumaier_sum((0..n - 1).map(|i| {
        let d = full(i + 1) - full(i);
        0.5 * (r[i] + r[i + 1]) * d * d / (r[i + 1] - r[i])
    }));
    let zeroth = neumaier_sum((1..n - 1).map(|i| {
        let a = full(i);
        0.5 * (r[i + 1] - r[i - 1]) * a * a / r[i]
    }));
    TAU * (grad + zeroth)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionRecord {
    pub nu: f64,
    pub dt: f64,
    pub snapshots: Vec<RadialProfile>,
    /// `sqrt(2π ∫ (α − α0)² r dr)` per snapshot.
    pub distances: Vec<f64>,
    /// `(1/2) ‖α‖²` in the discrete weighted norm.
    pub half_energy: Vec<f64>,
    /// `ν ∫_0^t D dt` accumulated up to each snapshot.
    pub dissipated: Vec<f64>,
    pub max_abs: Vec<f64>,
    pub steps: usize,
}

impl EvolutionRecord {
    /// Largest `|E(t) + ν∫D − E(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.half_energy[0];
        self.half_energy
            .iter()
            .zip(&self.dissipated)
            .map(|(e, d)| (e + d - e0).abs())
            .fold(0.0, f64::max)
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

/// `sqrt(2π ∫ (α − α0)² r dr)` by the trapezoid rule on the profile nodes.
/// Each side of `r0` uses its own one-sided limit of `α0`.
pub fn distance_to_initial(profile: &RadialProfile, geom: &AnnulusGeometry) -> f64 {
    let r0 = geom.r0;
    let g = &profile.grid;
    let v = &profile.values;
    let a0_side = |r: f64, left: bool| {
        let s = if r < r0 || (r == r0 && left) { -1.0 } else { 1.0 };
        s / (r * r)
    };
    let mut acc = Vec::with_capacity(g.len());
    for i in 0..g.len() - 1 {
        let (ra, rb) = (g[i], g[i + 1]);
        let left = rb <= r0;
        let da = v[i] - a0_side(ra, left);
        let db = v[i + 1] - a0_side(rb, left);
        acc.push(0.5 * (rb - ra) * (da * da * ra + db * db * rb));
    }
    (TAU * neumaier_sum(acc)).sqrt()
}

/// Crank-Nicolson integration with snapshots at `t_out` (strictly increasing
/// in `[0, T]`). The step is shortened where needed to land on each output time.
pub fn solve_parabolic(problem: &ParabolicProblem, t_out: &[f64]) -> Result<EvolutionRecord> {
    if t_out.is_empty() {
        return Err(Error::Parameter("no output times requested".into()));
    }
    if t_out.windows(2).any(|w| !(w[1] > w[0]))
        || t_out[0] < 0.0
        || *t_out.last().unwrap() > problem.geom.horizon
    {
        return Err(Error::Parameter(format!(
            "output times must be strictly increasing in [0, {}]",
            problem.geom.horizon
        )));
    }
    let grid = &problem.grid;
    let weights = grid.weights();
    let stencil = Stencil::new(grid);
    let m = grid.nodes.len() - 2;
    let interior_r = &grid.nodes[1..=m];

    let mut a = problem.initial_interior();
    let e_start = half_norm_sq(&weights, &a);
    let mut t = 0.0;
    let mut dissipated = 0.0;
    let mut steps = 0usize;
    let mut record = EvolutionRecord {
        nu: problem.nu,
        dt: problem.dt,
        snapshots: Vec::with_capacity(t_out.len()),
        distances: Vec::with_capacity(t_out.len()),
        half_energy: Vec::with_capacity(t_out.len()),
        dissipated: Vec::with_capacity(t_out.len()),
        max_abs: Vec::with_capacity(t_out.len()),
        steps: 0,
    };

    let mut la = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    for &target in t_out {
        while target - t > 1e-12 * problem.dt.max(1.0) {
            let dt = problem.dt.min(target - t);
            let c = 0.5 * problem.nu * dt;
            stencil.apply(&a, &mut la);
            for k in 0..m {
                rhs[k] = a[k] + c * la[k];
                lower[k] = -c * stencil.lower[k];
                diag[k] = 1.0 - c * stencil.diag[k];
                upper[k] = -c * stencil.upper[k];
            }
            if let Some(src) = &problem.source {
                for k in 0..m {
                    let r = interior_r[k];
                    rhs[k] += 0.5 * dt * (src(r, t) + src(r, t + dt));
                }
            }
            solve_tridiagonal(&lower, &diag, &upper, &mut rhs);
            let mid: Vec<f64> = a.iter().zip(&rhs).map(|(x, y)| 0.5 * (x + y)).collect();
            dissipated += problem.nu * dt * dissipation(grid, &mid);
            a.copy_from_slice(&rhs);
            t += dt;
            steps += 1;
        }
        t = target;
        let values: Vec<f64> = if target == 0.0 {
            grid.nodes.iter().map(|&r| (problem.initial)(r)).collect()
        } else {
            std::iter::once(0.0)
                .chain(a.iter().copied())
                .chain(std::iter::once(0.0))
                .collect()
        };
        let profile = RadialProfile::new(grid.nodes.clone(), values, target)?;
        // the initial snapshot is α0 itself; the node value 0 at r0 only
        // stands in for the jump
        record.distances.push(if target == 0.0 {
            0.0
        } else {
            distance_to_initial(&profile, &problem.geom)
        });
        record.max_abs.push(profile.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
        record.half_energy.push(if target == 0.0 { e_start } else { half_norm_sq(&weights, &a) });
        record.dissipated.push(dissipated);
        record.snapshots.push(profile);
    }
    record.steps = steps;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViscosityStudy {
    pub nus: Vec<f64>,
    pub t_probe: f64,
    pub n_cells: usize,
    pub distances: Vec<f64>,
    pub steps: Vec<usize>,
    /// Log-log slope of distance against `ν`.
    pub slope: Option<f64>,
    pub strictly_decreasing: bool,
}

/// `‖α_ν(·, t_probe) − α0‖` for each `ν` in a strictly decreasing list.
pub fn vanishing_viscosity_study(
    geom: &AnnulusGeometry,
    nus: &[f64],
    t_probe: f64,
    n_cells: usize,
) -> Result<ViscosityStudy> {
    if nus.len() < 3 || nus.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Sweep(
            "viscosity list must be strictly decreasing with at least 3 entries".into(),
        ));
    }
    let runs = nus
        .par_iter()
        .map(|&nu| {
            let p = ParabolicProblem::rotational(*geom, nu, n_cells)?;
            let rec = solve_parabolic(&p, &[t_probe])?;
            Ok((rec.distances[0], rec.steps))
        })
        .collect::<Result<Vec<_>>>()?;
    let distances: Vec<f64> = runs.iter().map(|r| r.0).collect();
    Ok(ViscosityStudy {
        nus: nus.to_vec(),
        t_probe,
        n_cells,
        strictly_decreasing: distances.windows(2).all(|w| w[1] < w[0]),
        slope: loglog_slope(nus, &distances, 0.0),
        steps: runs.iter().map(|r| r.1).collect(),
        distances,
    })
}

/// Manufactured solution `e^{-t} sin(π (r − ρ)/(R − ρ))`.
pub fn manufactured_alpha(geom: &AnnulusGeometry, r: f64, t: f64) -> f64 {
    let k = PI / (geom.outer - geom.rho);
    (-t).exp() * (k * (r - geom.rho)).sin()
}

/// Source making [`manufactured_alpha`] an exact solution for viscosity `nu`.
pub fn manufactured_source(geom: AnnulusGeometry, nu: f64) -> RadialSource {
    let k = PI / (geom.outer - geom.rho);
    Arc::new(move |r: f64, t: f64| {
        let (s, c) = (k * (r - geom.rho)).sin_cos();
        let e = (-t).exp();
        let a = e * s;
        let a_r = e * k * c;
        let a_rr = -e * k * k * s;
        -a - nu * (a_rr + a_r / r - a / (r * r))
    })
}

/// Discrete `L²(r dr)` error of the manufactured problem at `t_end`.
pub fn manufactured_error(
    geom: &AnnulusGeometry,
    nu: f64,
    n_cells: usize,
    dt: f64,
    t_end: f64,
) -> Result<f64> {
    let g = *geom;
    let initial: RadialData = Arc::new(move |r| manufactured_alpha(&g, r, 0.0));
    let p = ParabolicProblem::custom(g, nu, n_cells, dt, initial, Some(manufactured_source(g, nu)))?;
    let rec = solve_parabolic(&p, &[t_end])?;
    let snap = &rec.snapshots[0];
    let w = p.grid.weights();
    let err = neumaier_sum(
        snap.grid
            .iter()
            .zip(&snap.values)
            .zip(&w)
            .map(|((&r, &a), &wi)| {
                let d = a - manufactured_alpha(&g, r, t_end);
                wi * d * d
            }),
    );
    Ok(err.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStudy {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

/// Spatial order with a time step small enough that time error is negligible.
pub fn mms_space_study(geom: &AnnulusGeometry, cells: &[usize], dt: f64, t_end: f64) -> Result<OrderStudy> {
    let errors = cells
        .par_iter()
        .map(|&n| manufactured_error(geom, 1.0, n, dt, t_end))
        .collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = cells
        .iter()
        .map(|&n| (geom.outer - geom.rho) / n as f64)
        .collect();
    Ok(OrderStudy {
        orders: crate::fit::pairwise_orders(&h, &errors),
        steps: h,
        errors,
    })
}

/// Temporal order on a fine grid.
pub fn mms_time_study(geom: &AnnulusGeometry, n_cells: usize, dts: &[f64], t_end: f64) -> Result<OrderStudy> {
    let errors = dts
        .par_iter()
        .map(|&dt| manufactured_error(geom, 1.0, n_cells, dt, t_end))
        .collect::<Result<Vec<_>>>()?;
    Ok(OrderStudy {
        orders: crate::fit::pairwise_orders(dts, &errors),
        steps: dts.to_vec(),
        errors,
    })
}

/// Azimuthal velocity `α(r) (sin θ, −cos θ)` built from a radial profile,
/// with pressure `p(r) = ∫_ρ^r α(s)²/s ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedField {
    pub profile: RadialProfile,
}

pub fn lift_to_2d(profile: RadialProfile) -> LiftedField {
    LiftedField { profile }
}

impl LiftedField {
    pub fn velocity_polar(&self, r: f64, theta: f64) -> [f64; 2] {
        let a = self.profile.interpolate(r);
        let (s, c) = theta.sin_cos();
        [a * s, -a * c]
    }

    pub fn velocity(&self, x: [f64; 2]) -> [f64; 2] {
        let p = crate::geometry::cartesian_to_polar(x);
        self.velocity_polar(p.r, p.theta)
    }

    pub fn pressure(&self, r: f64) -> f64 {
        let g = &self.profile.grid;
        let lo = g[0];
        if r <= lo {
            return 0.0;
        }
        let integrand = |s: f64| {
            let a = self.profile.interpolate(s);
            a * a / s
        };
        // panels at the profile nodes keep each piece polynomial over 1/s
        let mut acc = Vec::new();
        let mut prev = lo;
        for &node in g.iter().skip(1) {
            let b = node.min(r);
            if b > prev {
                acc.push(adaptive_gauss(&integrand, prev, b, 1e-13, 1e-18));
            }
            if node >= r {
                break;
            }
            prev = node;
        }
        neumaier_sum(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn geom() -> AnnulusGeometry {
        AnnulusGeometry::default()
    }

    #[test]
    fn grid_contains_r0() {
        let g = RadialGrid::with_node(1.0, 2.0, 1.5, 200).unwrap();
        assert!(g.nodes.contains(&1.5));
        let g = RadialGrid::with_node(1.0, 2.0, 1.3, 101).unwrap();
        assert!(g.nodes.contains(&1.3));
        assert_eq!(g.nodes[0], 1.0);
        assert_eq!(*g.nodes.last().unwrap(), 2.0);
    }

    #[test]
    fn stencil_matches_centered_form_on_uniform_grid() {
        let g = RadialGrid::uniform(1.0, 2.0, 50).unwrap();
        let s = Stencil::new(&g);
        let h = 0.02;
        for k in 0..49 {
            let r = g.nodes[k + 1];
            assert_abs_diff_eq!(s.lower[k], 1.0 / (h * h) - 1.0 / (2.0 * h * r), epsilon = 1e-9);
            assert_abs_diff_eq!(s.upper[k], 1.0 / (h * h) + 1.0 / (2.0 * h * r), epsilon = 1e-9);
            assert_abs_diff_eq!(s.diag[k], -2.0 / (h * h) - 1.0 / (r * r), epsilon = 1e-9);
        }
    }

    #[test]
    fn stencil_is_symmetric_in_weighted_inner_product() {
        let g = RadialGrid::with_node(1.0, 2.0, 1.37, 40).unwrap();
        let s = Stencil::new(&g);
        let w = g.weights();
        let m = g.nodes.len() - 2;
        let a: Vec<f64> = (0..m).map(|k| (k as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..m).map(|k| (k as f64 * 0.11).cos()).collect();
        let (mut la, mut lb) = (vec![0.0; m], vec![0.0; m]);
        s.apply(&a, &mut la);
        s.apply(&b, &mut lb);
        let ab: f64 = (0..m).map(|k| w[k + 1] * la[k] * b[k]).sum();
        let ba: f64 = (0..m).map(|k| w[k + 1] * lb[k] * a[k]).sum();
        assert_abs_diff_eq!(ab, ba, epsilon = 1e-9 * ab.abs().max(1.0));
        let aa: f64 = (0..m).map(|k| w[k + 1] * la[k] * a[k]).sum();
        assert_abs_diff_eq!(aa, -dissipation(&g, &a), epsilon = 1e-9 * aa.abs());
    }

    #[test]
    fn zero_viscosity_is_rejected() {
        assert!(ParabolicProblem::rotational(geom(), 0.0, 100).is_err());
        assert!(ParabolicProblem::rotational(geom(), -1e-3, 100).is_err());
    }

    #[test]
    fn initial_snapshot_is_alpha0() {
        let p = ParabolicProblem::rotational(geom(), 1e-3, 200).unwrap();
        let rec = solve_parabolic(&p, &[0.0, 0.1]).unwrap();
        let a0 = rotational_alpha0(&geom());
        for (r, v) in rec.snapshots[0].grid.iter().zip(&rec.snapshots[0].values) {
            assert_eq!(*v, a0(*r));
        }
        assert_eq!(rec.distances[0], 0.0);
        assert_eq!(rec.dissipated[0], 0.0);
    }

    #[test]
    fn energy_equality_holds_discretely() {
        let p = ParabolicProblem::rotational(geom(), 1e-2, 400).unwrap();
        let times: Vec<f64> = (0..=10).map(|k| 0.1 * k as f64).collect();
        let rec = solve_parabolic(&p, &times).unwrap();
        assert!(rec.energy_drift() < 1e-6, "{}", rec.energy_drift());
        // energy is dissipated, not conserved
        assert!(rec.dissipated.last().unwrap() > &1e-3);
    }

    #[test]
    fn maximum_principle_per_snapshot() {
        for nu in [1e-1, 1e-2, 1e-3] {
            let p = ParabolicProblem::rotational(geom(), nu, 300).unwrap();
            let rec = solve_parabolic(&p, &[0.0, 0.01, 0.1, 0.5, 1.0]).unwrap();
            for m in &rec.max_abs {
                assert!(*m <= 1.0 + 1e-14, "nu={nu}: {m}");
            }
        }
    }

    #[test]
    fn decays_to_zero_at_long_times() {
        let g = AnnulusGeometry::new(1.0, 2.0, 1.5, 20.0).unwrap();
        let p = ParabolicProblem::rotational(g, 1.0, 100).unwrap();
        let rec = solve_parabolic(&p, &[1.0, 5.0, 20.0]).unwrap();
        let norms: Vec<f64> = rec.half_energy.iter().map(|e| (2.0 * e).sqrt()).collect();
        assert!(norms[0] > norms[1] && norms[1] > norms[2]);
        assert!(norms[2] < 1e-40, "{norms:?}");
    }

    #[test]
    fn manufactured_solution_is_second_order_in_space() {
        let s = mms_space_study(&geom(), &[20, 40, 80, 160], 1e-4, 0.5).unwrap();
        for o in &s.orders {
            assert!(*o >= 1.8, "{:?}", s);
        }
    }

    #[test]
    fn manufactured_solution_is_second_order_in_time() {
        let s = mms_time_study(&geom(), 1000, &[0.1, 0.05, 0.025, 0.0125], 1.0).unwrap();
        for o in &s.orders {
            assert!(*o >= 1.8, "{:?}", s);
        }
    }

    #[test]
    fn lift_of_alpha0_is_v0() {
        let g = geom();
        let grid = RadialGrid::with_node(g.rho, g.outer, g.r0, 100).unwrap();
        let a0 = rotational_alpha0(&g);
        let values: Vec<f64> = grid.nodes.iter().map(|&r| a0(r)).collect();
        let lifted = lift_to_2d(RadialProfile::new(grid.nodes.clone(), values, 0.0).unwrap());
        let sub = crate::Subsolution::new(g, Default::default()).unwrap();
        // compare at grid radii, where the interpolant is exact
        for (k, &r) in grid.nodes.iter().enumerate().step_by(7) {
            if r == g.r0 {
                continue;
            }
            let th = 0.3 * k as f64;
            let v = lifted.velocity_polar(r, th);
            let w = sub.v0([r * th.cos(), r * th.sin()]);
            assert!((v[0] - w[0]).abs() < 1e-12 && (v[1] - w[1]).abs() < 1e-12);
        }
        let zero = lift_to_2d(RadialProfile::new(vec![1.0, 2.0], vec![0.0, 0.0], 0.0).unwrap());
        assert_eq!(zero.velocity([1.5, 0.2]), [0.0, 0.0]);
        assert_eq!(zero.pressure(1.7), 0.0);
    }

    #[test]
    fn lifted_pressure_of_linear_profile() {
        let grid = RadialGrid::uniform(1.0, 2.0, 10).unwrap();
        let values: Vec<f64> = grid.nodes.iter().map(|&r| r - 1.5).collect();
        let lifted = lift_to_2d(RadialProfile::new(grid.nodes, values, 0.0).unwrap());
        // ∫ (s - 1.5)^2 / s ds = s^2/2 - 3 s + 2.25 ln s
        let anti = |s: f64| 0.5 * s * s - 3.0 * s + 2.25 * s.ln();
        for r in [1.05, 1.3, 1.77, 2.0] {
            assert!((lifted.pressure(r) - (anti(r) - anti(1.0))).abs() < 1e-13);
        }
    }

    #[test]
    fn lifted_field_is_weakly_divergence_free() {
        let g = geom();
        let p = ParabolicProblem::rotational(g, 1e-2, 200).unwrap();
        let rec = solve_parabolic(&p, &[0.5]).unwrap();
        let lifted = lift_to_2d(rec.snapshots[0].clone());
        let quad = crate::weakform::WeakQuadrature::default();
        for (_, test) in crate::weakform::testfield::scalar_library(&g) {
            let r = crate::weakform::weak_residual_divergence_of(
                &|r, th| lifted.velocity_polar(r, th),
                (g.rho, g.outer),
                &[g.r0],
                &test,
                &quad,
            )
            .unwrap();
            assert!(r.abs() < 1e-12, "{r:e}");
        }
    }
}
