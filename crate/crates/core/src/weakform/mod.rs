//! Distributional residuals of the subsolution system and energy accounting.
//!
//! All space-time integrals use fan-aligned quadrature: for every time node
//! the radial panels are split at `r0 ± lambda t`, where the subsolution has
//! kinks, so each panel sees a smooth integrand.

pub mod testfield;

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{loglog_slope, pairwise_orders};
use crate::geometry::AnnulusGeometry;
use crate::quadrature::{
    adaptive_gauss, breakpoints, composite_nodes, neumaier_sum, refine_breaks, time_nodes,
    GaussLegendre, PolarRule,
};
use crate::subsolution::{ubar_from, Subsolution, PRESSURE_RTOL};

pub use testfield::{Profile, SeparableField, TestField, VectorSample};

/// Cell counts and Gauss order for the space-time rules. Cell counts are per
/// smooth panel (radial panels are first cut at the fan edges).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeakQuadrature {
    pub order: usize,
    pub radial_cells: usize,
    pub theta_cells: usize,
    pub time_cells: usize,
}

impl Default for WeakQuadrature {
    fn default() -> Self {
        Self {
            order: 8,
            radial_cells: 4,
            theta_cells: 8,
            time_cells: 4,
        }
    }
}

impl WeakQuadrature {
    pub fn with_order(order: usize) -> Self {
        Self {
            order,
            ..Self::default()
        }
    }

    /// Same order, every cell count multiplied by `2^level`.
    pub fn refined(&self, level: u32) -> Self {
        let k = 1usize << level;
        Self {
            order: self.order,
            radial_cells: self.radial_cells * k,
            theta_cells: self.theta_cells * k,
            time_cells: self.time_cells * k,
        }
    }
}

/// Coarse base rule for refinement studies: residuals stay well above
/// roundoff for four levels.
pub const REFINEMENT_BASE: WeakQuadrature = WeakQuadrature {
    order: 3,
    radial_cells: 1,
    theta_cells: 2,
    time_cells: 1,
};

/// Pressure `qbar` at every radial node, accumulated panel by panel so that
/// only one short integral is evaluated per node.
fn qbar_at_nodes(sub: &Subsolution, radii: &[f64], t: f64) -> Vec<f64> {
    let (lo, hi) = sub.region().edges(t);
    let integrand = |s: f64| {
        let a = sub.alpha(s, t);
        a * a / s
    };
    let mut acc = 0.0;
    let mut prev = sub.geom.rho;
    radii
        .iter()
        .map(|&r| {
            debug_assert!(r >= prev);
            acc += breakpoints(prev, r, &[lo, hi])
                .windows(2)
                .map(|w| adaptive_gauss(&integrand, w[0], w[1], PRESSURE_RTOL, 1e-17))
                .sum::<f64>();
            prev = r;
            let a = sub.alpha(r, t);
            0.5 * a * a + acc
        })
        .collect()
}

fn contract(u: [[f64; 2]; 2], grad: [[f64; 2]; 2]) -> f64 {
    u[0][0] * grad[0][0] + u[0][1] * grad[0][1] + u[1][0] * grad[1][0] + u[1][1] * grad[1][1]
}

/// `∫_0^T ∫ [vbar·∂tφ + ubar:∇φ + qbar divφ] dx dt + ∫ v0·φ(x, 0) dx`,
/// with `ubar:∇φ = Σ ubar_ij ∂_j φ_i`. Vanishes for a distributional solution
/// of the linear system with initial datum `v0`.
pub fn weak_residual_linear_system(
    sub: &Subsolution,
    phi: &TestField,
    quad: &WeakQuadrature,
) -> Result<f64> {
    let geom = &sub.geom;
    phi.check_support(geom, 0.0)?;
    let scalar = phi.scalar();
    let (r_lo, r_hi) = scalar.radial_support().expect("checked above");
    let (t_lo, t_hi) = scalar.time_support().expect("checked above");
    let t_start = t_lo.max(0.0);
    let order = quad.order;

    let radial_kinks = scalar.radial.kinks();
    let angular = angular_breaks(&scalar.angular, quad);
    let nodes = time_rule(t_start, t_hi, &scalar.temporal.kinks(), quad)?;
    let interior: Vec<f64> = nodes
        .par_iter()
        .map(|&(t, wt)| {
            let (lo, hi) = sub.region().edges(t);
            let mut cuts = vec![lo, hi];
            cuts.extend_from_slice(&radial_kinks);
            let breaks = refine_breaks(&breakpoints(r_lo, r_hi, &cuts), quad.radial_cells);
            let rule = PolarRule::from_breaks(&breaks, &angular, order);
            let radii: Vec<f64> = rule.radial.iter().map(|p| p.0).collect();
            let q = qbar_at_nodes(sub, &radii, t);
            let per_r = rule.radial.iter().zip(&q).map(|(&(r, wr), &qbar)| {
                let alpha = sub.alpha(r, t);
                let beta = -0.5 * alpha * alpha;
                let gamma = sub.gamma(r, t);
                let ang = rule.angular.iter().map(|&(th, wth)| {
                    let s = phi.eval(r, th, t);
                    let (sn, cs) = th.sin_cos();
                    let v = [alpha * sn, -alpha * cs];
                    let u = ubar_from(beta, gamma, th).to_array();
                    wth * (v[0] * s.time_derivative[0]
                        + v[1] * s.time_derivative[1]
                        + contract(u, s.jacobian)
                        + qbar * s.divergence)
                });
                wr * neumaier_sum(ang)
            });
            wt * neumaier_sum(per_r)
        })
        .collect();
    let mut total = neumaier_sum(interior);

    if t_lo < 0.0 {
        total += initial_pairing(
            sub,
            quad,
            (r_lo, r_hi),
            &radial_kinks,
            &angular,
            |r, th| phi.eval(r, th, 0.0).value,
        );
    }
    Ok(total)
}

/// Uniform angular panels, further cut where the angular profile is not analytic.
fn angular_breaks(profile: &Profile, quad: &WeakQuadrature) -> Vec<f64> {
    let cuts = profile.singular_points(0.0, TAU);
    refine_breaks(&breakpoints(0.0, TAU, &cuts), quad.theta_cells)
}

fn time_rule(t_lo: f64, t_hi: f64, kinks: &[f64], quad: &WeakQuadrature) -> Result<Vec<(f64, f64)>> {
    if kinks.iter().all(|&k| k <= t_lo || k >= t_hi) {
        return time_nodes(t_lo, t_hi, quad.time_cells, quad.order);
    }
    let breaks = refine_breaks(&breakpoints(t_lo, t_hi, kinks), quad.time_cells);
    Ok(composite_nodes(&GaussLegendre::new(quad.order), &breaks))
}

/// `∫ v0 · φ dx` over `[r_lo, r_hi]`, split at `r0` and the profile kinks.
fn initial_pairing<F: Fn(f64, f64) -> [f64; 2]>(
    sub: &Subsolution,
    quad: &WeakQuadrature,
    (r_lo, r_hi): (f64, f64),
    kinks: &[f64],
    angular: &[f64],
    phi: F,
) -> f64 {
    let mut cuts = vec![sub.geom.r0];
    cuts.extend_from_slice(kinks);
    let breaks = refine_breaks(&breakpoints(r_lo, r_hi, &cuts), quad.radial_cells);
    let rule = PolarRule::from_breaks(&breaks, angular, quad.order);
    rule.integrate(|r, th| {
        let v = sub.vbar_polar(r, th, 0.0);
        let p = phi(r, th);
        v[0] * p[0] + v[1] * p[1]
    })
}

/// `∫ vbar(·, t) · ∇p dx` for a scalar test field at a fixed time.
pub fn weak_residual_divergence(
    sub: &Subsolution,
    p: &SeparableField,
    t: f64,
    quad: &WeakQuadrature,
) -> Result<f64> {
    let (lo, hi) = sub.region().edges(t);
    weak_residual_divergence_of(
        &|r, th| sub.vbar_polar(r, th, t),
        (sub.geom.rho, sub.geom.outer),
        &[lo, hi, sub.geom.r0],
        p,
        quad,
    )
}

/// `∫ v · ∇p dx` over `domain = (rho, R)` for any velocity given in polar
/// coordinates; `cuts` are radii where `v` is not smooth.
pub fn weak_residual_divergence_of(
    velocity: &(dyn Fn(f64, f64) -> [f64; 2] + Sync),
    domain: (f64, f64),
    cuts: &[f64],
    p: &SeparableField,
    quad: &WeakQuadrature,
) -> Result<f64> {
    let (r_lo, r_hi) = p.radial_support().unwrap_or(domain);
    if r_lo < domain.0 || r_hi > domain.1 {
        return Err(Error::Support(format!(
            "radial support [{r_lo}, {r_hi}] leaves the annulus"
        )));
    }
    let mut all_cuts = cuts.to_vec();
    all_cuts.extend(p.radial.kinks());
    let breaks = refine_breaks(&breakpoints(r_lo, r_hi, &all_cuts), quad.radial_cells);
    let rule = PolarRule::from_breaks(&breaks, &angular_breaks(&p.angular, quad), quad.order);
    Ok(rule.integrate(|r, th| {
        let g = p.eval(r, th, 0.0).spatial.gradient(r, th);
        let v = velocity(r, th);
        v[0] * g[0] + v[1] * g[1]
    }))
}

/// Residual values of one test field across refinement levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldResiduals {
    pub name: String,
    pub residuals: Vec<f64>,
    /// Pairwise orders between consecutive levels.
    pub orders: Vec<f64>,
    pub fitted_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub levels: Vec<WeakQuadrature>,
    /// Relative mesh width `1 / 2^level`.
    pub widths: Vec<f64>,
    pub fields: Vec<FieldResiduals>,
}

impl ResidualReport {
    pub fn min_order(&self) -> f64 {
        self.fields
            .iter()
            .flat_map(|f| f.orders.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Weak residuals of each field on `levels` successively halved meshes.
pub fn residual_refinement(
    sub: &Subsolution,
    fields: &[(&str, TestField)],
    base: &WeakQuadrature,
    levels: u32,
) -> Result<ResidualReport> {
    if levels < 3 {
        return Err(Error::Parameter(
            "a refinement study needs at least 3 levels".into(),
        ));
    }
    let quads: Vec<WeakQuadrature> = (0..levels).map(|l| base.refined(l)).collect();
    let widths: Vec<f64> = (0..levels).map(|l| 0.5_f64.powi(l as i32)).collect();
    let mut out = Vec::with_capacity(fields.len());
    for (name, phi) in fields {
        let residuals = quads
            .iter()
            .map(|q| weak_residual_linear_system(sub, phi, q))
            .collect::<Result<Vec<f64>>>()?;
        out.push(FieldResiduals {
            name: name.to_string(),
            orders: pairwise_orders(&widths, &residuals),
            fitted_order: loglog_slope(&widths, &residuals, 0.0),
            residuals,
        });
    }
    Ok(ResidualReport {
        levels: quads,
        widths,
        fields: out,
    })
}

/// Centered finite-difference residuals of the radial reduction
/// `∂rβ + 2β/r + ∂r qbar` and `∂tα + ∂rγ + 2γ/r` at step `h` in both r and t.
pub fn radial_system_residual(sub: &Subsolution, r: f64, t: f64, h: f64) -> Result<(f64, f64)> {
    let geom = &sub.geom;
    if r - h <= geom.rho || r + h >= geom.outer || t - h <= 0.0 {
        return Err(Error::Support(format!(
            "stencil of width {h} at (r={r}, t={t}) leaves the domain"
        )));
    }
    let region = sub.region();
    for tt in [t - h, t, t + h] {
        let margin = region.edge_distance(r, tt);
        if margin < 2.0 * h {
            return Err(Error::NearFanEdge { r, t, margin });
        }
    }
    let d = |g: &dyn Fn(f64) -> f64, x: f64| (g(x + h) - g(x - h)) / (2.0 * h);
    let beta = sub.beta(r, t);
    let gamma = sub.gamma(r, t);
    let res1 = d(&|s| sub.beta(s, t), r) + 2.0 * beta / r + d(&|s| sub.qbar(s, t), r);
    let res2 = d(&|s| sub.alpha(r, s), t) + d(&|s| sub.gamma(s, t), r) + 2.0 * gamma / r;
    Ok((res1, res2))
}

/// Exact `∂r alpha` away from the fan edges.
pub fn alpha_dr(sub: &Subsolution, r: f64, t: f64) -> f64 {
    let f = sub.f(r, t);
    let df = if t > 0.0 && sub.region().contains(r, t) {
        1.0 / (sub.params.lambda * t)
    } else {
        0.0
    };
    df / (r * r) - 2.0 * f / (r * r * r)
}

/// First radial residual with analytic derivatives: `∂rβ = -α ∂rα` and the
/// derivative of the pressure construction `∂r qbar = α ∂rα + α²/r`.
pub fn radial_momentum_residual_analytic(sub: &Subsolution, r: f64, t: f64) -> f64 {
    let a = sub.alpha(r, t);
    let da = alpha_dr(sub, r, t);
    let beta = -0.5 * a * a;
    -a * da + 2.0 * beta / r + (a * da + a * a / r)
}

/// Root-mean-square FD residuals over a point set for each step in `steps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialFdStudy {
    pub steps: Vec<f64>,
    pub rms_res1: Vec<f64>,
    pub rms_res2: Vec<f64>,
    pub n_points: usize,
}

impl RadialFdStudy {
    /// Ratios between consecutive steps; `None` where the residual is
    /// identically zero (as for `res2` outside the fan).
    pub fn ratios(&self) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
        let rat = |v: &[f64]| {
            v.windows(2)
                .map(|w| (w[1] > 0.0).then(|| w[0] / w[1]))
                .collect::<Vec<_>>()
        };
        (rat(&self.rms_res1), rat(&self.rms_res2))
    }
}

pub fn radial_fd_study(sub: &Subsolution, points: &[(f64, f64)], steps: &[f64]) -> Result<RadialFdStudy> {
    let mut rms1 = Vec::with_capacity(steps.len());
    let mut rms2 = Vec::with_capacity(steps.len());
    for &h in steps {
        let res = points
            .par_iter()
            .map(|&(r, t)| radial_system_residual(sub, r, t, h))
            .collect::<Result<Vec<_>>>()?;
        let n = res.len() as f64;
        rms1.push((res.iter().map(|x| x.0 * x.0).sum::<f64>() / n).sqrt());
        rms2.push((res.iter().map(|x| x.1 * x.1).sum::<f64>() / n).sqrt());
    }
    Ok(RadialFdStudy {
        steps: steps.to_vec(),
        rms_res1: rms1,
        rms_res2: rms2,
        n_points: points.len(),
    })
}

/// Deterministic sample of `n` points `(r, t)` with `t` in `[0.2T, 0.9T]`,
/// split evenly between the fan interior and the stationary region, each at
/// least `margin` from the fan edges and the boundary.
pub fn radial_sample_points(sub: &Subsolution, n: usize, margin: f64) -> Vec<(f64, f64)> {
    let geom = &sub.geom;
    let region = sub.region();
    let mut pts = Vec::with_capacity(n);
    let golden = 0.618_033_988_749_894_9;
    let mut k = 0usize;
    while pts.len() < n {
        k += 1;
        let u = (k as f64 * golden).fract();
        let v = (k as f64 * 0.754_877_666_246_692_7).fract();
        let t = geom.horizon * (0.2 + 0.7 * v);
        let (lo, hi) = region.edges(t);
        let want_fan = pts.len() % 2 == 0;
        let r = if want_fan {
            lo + margin + u * (hi - lo - 2.0 * margin)
        } else {
            geom.rho + margin + u * (geom.outer - geom.rho - 2.0 * margin)
        };
        if r <= geom.rho + margin || r >= geom.outer - margin {
            continue;
        }
        if region.edge_distance(r, t) < margin {
            continue;
        }
        if want_fan != region.contains(r, t) {
            continue;
        }
        pts.push((r, t));
    }
    pts
}

/// `∫|v0|² dx = π(ρ⁻² − R⁻²)`.
pub fn initial_energy(geom: &AnnulusGeometry) -> f64 {
    PI * (geom.rho.powi(-2) - geom.outer.powi(-2))
}

fn radial_rule(a: f64, b: f64, cuts: &[f64], quad: &WeakQuadrature) -> Vec<(f64, f64)> {
    let breaks = refine_breaks(&breakpoints(a, b, cuts), quad.radial_cells);
    composite_nodes(&GaussLegendre::new(quad.order), &breaks)
}

/// `∫|v0|² dx` by quadrature, split at `r0`.
pub fn initial_energy_quadrature(sub: &Subsolution, quad: &WeakQuadrature) -> f64 {
    let g = &sub.geom;
    TAU * neumaier_sum(
        radial_rule(g.rho, g.outer, &[g.r0], quad)
            .into_iter()
            .map(|(r, w)| {
                let a = sub.alpha0(r);
                w * a * a * r
            }),
    )
}

/// `∫ 2 ebar(x, t) dx`, the kinetic energy of any solution generated from the
/// subsolution.
pub fn energy_total(sub: &Subsolution, t: f64, quad: &WeakQuadrature) -> f64 {
    let g = &sub.geom;
    let (lo, hi) = sub.region().edges(t);
    TAU * neumaier_sum(
        radial_rule(g.rho, g.outer, &[lo, hi], quad)
            .into_iter()
            .map(|(r, w)| w * 2.0 * sub.ebar(r, t) * r),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub energy_total: f64,
    pub e0: f64,
    pub deficit: f64,
}

pub fn energy_history(sub: &Subsolution, times: &[f64], quad: &WeakQuadrature) -> Vec<EnergyRecord> {
    let e0 = initial_energy(&sub.geom);
    times
        .iter()
        .map(|&t| {
            let e = energy_total(sub, t, quad);
            EnergyRecord {
                t,
                energy_total: e,
                e0,
                deficit: e0 - e,
            }
        })
        .collect()
}

/// True if the sequence is strictly decreasing.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttainmentReport {
    pub times: Vec<f64>,
    /// `∫|vbar(·, t) − v0|² dx`.
    pub l2_squared: Vec<f64>,
    /// `(name, ∫(vbar(·, t) − v0)·φ dx)` per spatial test field.
    pub pairings: Vec<(String, Vec<f64>)>,
    pub l2_squared_order: Option<f64>,
    pub pairing_orders: Vec<Option<f64>>,
}

/// Decay of `vbar(·, t) − v0` as `t → 0`, in L² and against spatial test fields
/// (the fields' time factors are ignored).
pub fn initial_data_attainment(
    sub: &Subsolution,
    times: &[f64],
    fields: &[(&str, TestField)],
    quad: &WeakQuadrature,
) -> Result<AttainmentReport> {
    if times.iter().any(|&t| t < 0.0 || t >= sub.geom.horizon) {
        return Err(Error::Parameter("attainment times must lie in [0, T)".into()));
    }
    let g = &sub.geom;
    let l2_squared: Vec<f64> = times
        .iter()
        .map(|&t| {
            let (lo, hi) = sub.region().edges(t);
            if hi <= lo {
                return 0.0;
            }
            TAU * neumaier_sum(radial_rule(lo, hi, &[g.r0], quad).into_iter().map(|(r, w)| {
                let d = sub.alpha(r, t) - sub.alpha0(r);
                w * d * d * r
            }))
        })
        .collect();
    let mut pairings = Vec::with_capacity(fields.len());
    let mut orders = Vec::with_capacity(fields.len());
    for (name, phi) in fields {
        let frozen = phi.frozen();
        let (r_lo, r_hi) = frozen
            .scalar()
            .radial_support()
            .unwrap_or((g.rho, g.outer));
        let vals: Vec<f64> = times
            .iter()
            .map(|&t| {
                let (lo, hi) = sub.region().edges(t);
                if hi <= lo {
                    return 0.0;
                }
                let a = r_lo.max(lo);
                let b = r_hi.min(hi);
                if b <= a {
                    return 0.0;
                }
                let mut cuts = vec![g.r0];
                cuts.extend(frozen.scalar().radial.kinks());
                let breaks = refine_breaks(&breakpoints(a, b, &cuts), quad.radial_cells);
                let angular = angular_breaks(&frozen.scalar().angular, quad);
                let rule = PolarRule::from_breaks(&breaks, &angular, quad.order);
                rule.integrate(|r, th| {
                    let d = sub.alpha(r, t) - sub.alpha0(r);
                    let (sn, cs) = th.sin_cos();
                    let p = frozen.eval(r, th, 0.0).value;
                    d * (sn * p[0] - cs * p[1])
                })
            })
            .collect();
        orders.push(loglog_slope(times, &vals, 1e-300));
        pairings.push((name.to_string(), vals));
    }
    Ok(AttainmentReport {
        times: times.to_vec(),
        l2_squared_order: loglog_slope(times, &l2_squared, 1e-300),
        l2_squared,
        pairings,
        pairing_orders: orders,
    })
}
