//! Boundary cutoff of divergence-free test fields and the scaling of the
//! boundary integrals it produces.
//!
//! For a stream function `ψ` vanishing on both circles, `w = ∇⊥ψ` with
//! `∇⊥g = (∂y g, −∂x g)`, and the cut-off field is
//! `w_ε = ∇⊥(χ(d/ε) ψ) = χ(d/ε) w + (χ'(d/ε)/ε) ψ ∇⊥d`, where `d` is the
//! distance to the boundary. The difference `W = w_ε − w = ∇⊥((χ − 1) ψ)`
//! lives in the collar `Γ_2ε = {d < 2ε}`.
//!
//! In the boundary frame `(ν, τ)` (inner normal and `τ = ν⊥`, so `∇⊥d = −τ`)
//! with `w_ν = ∂τψ`, `w_τ = −∂νψ` and signed curvature `κ`, the derivatives of
//! `W` with the frame frozen at the evaluation point are
//!
//! ```text
//! ∂ν W·ν = (χ'/ε) w_ν + (χ−1) ∂ν w·ν
//! ∂ν W·τ = (χ−1) ∂ν w·τ + 2 (χ'/ε) w_τ − (χ''/ε²) ψ
//! ∂τ W·ν = (χ−1) ∂τ w·ν + κ (χ'/ε) ψ
//! ∂τ W·τ = (χ−1) ∂τ w·τ − (χ'/ε) w_ν
//! ```

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::geometry::{boundary_distance, AnnulusGeometry, BoundaryComponent, BoundaryFrame};
use crate::jet::{Jet, PolarDerivs};
use crate::quadrature::{neumaier_sum, refine_breaks, GaussLegendre};

/// Values below this are treated as exact zeros in slope fits.
pub const ZERO_FLOOR: f64 = 1e-14;

/// Quintic smoothstep cutoff: `0` on `[0, 1]`, `1` on `[2, ∞)`,
/// `χ(1 + u) = 6u⁵ − 15u⁴ + 10u³` in between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CutoffChi;

impl CutoffChi {
    pub fn value(&self, s: f64) -> f64 {
        if s <= 1.0 {
            0.0
        } else if s >= 2.0 {
            1.0
        } else {
            let u = s - 1.0;
            u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
        }
    }

    pub fn d1(&self, s: f64) -> f64 {
        if s <= 1.0 || s >= 2.0 {
            0.0
        } else {
            let u = s - 1.0;
            30.0 * u * u * (u - 1.0) * (u - 1.0)
        }
    }

    pub fn d2(&self, s: f64) -> f64 {
        if s <= 1.0 || s >= 2.0 {
            0.0
        } else {
            let u = s - 1.0;
            60.0 * u * (2.0 * u - 1.0) * (u - 1.0)
        }
    }
}

pub fn build_chi() -> CutoffChi {
    CutoffChi
}

/// `ψ = amplitude · sin(π (r − ρ)/(R − ρ)) (1 + ½ cos(θ − ω t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StreamTestField {
    pub rho: f64,
    pub outer: f64,
    pub omega: f64,
    pub amplitude: f64,
}

impl StreamTestField {
    pub fn new(geom: &AnnulusGeometry) -> Self {
        Self {
            rho: geom.rho,
            outer: geom.outer,
            omega: 0.5,
            amplitude: 1.0,
        }
    }

    /// The same field scaled to zero.
    pub fn zero(geom: &AnnulusGeometry) -> Self {
        Self {
            amplitude: 0.0,
            ..Self::new(geom)
        }
    }

    pub fn polar(&self, r: f64, theta: f64, t: f64) -> PolarDerivs {
        let k = PI / (self.outer - self.rho);
        let radial = Jet::var(k * (r - self.rho)).sin().scale(1.0);
        let radial = Jet {
            v: radial.v,
            d1: radial.d1 * k,
            d2: radial.d2 * k * k,
        };
        let angular = Jet::var(theta - self.omega * t).cos().scale(0.5) + 1.0;
        PolarDerivs::separable(radial, angular).scale(self.amplitude)
    }

    pub fn psi(&self, x: [f64; 2], t: f64) -> f64 {
        let (r, th) = polar(x);
        self.polar(r, th, t).value
    }

    /// `w = ∇⊥ψ`.
    pub fn w(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let (r, th) = polar(x);
        let g = self.polar(r, th, t).gradient(r, th);
        [g[1], -g[0]]
    }
}

fn polar(x: [f64; 2]) -> (f64, f64) {
    (x[0].hypot(x[1]), x[1].atan2(x[0]))
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `J[a][b] · e_a ⊗ f_b` contracted with `u` (component) and `v` (direction).
fn bilinear(j: &[[f64; 2]; 2], comp: [f64; 2], dir: [f64; 2]) -> f64 {
    let mut acc = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            acc += comp[a] * j[a][b] * dir[b];
        }
    }
    acc
}

/// Synthetic velocity on the boundary bands: `v_ν = d^α g(θ)`, `v_τ = h(θ)`
/// with `g = 1 + ½ sin θ + ¼ cos θ` and `h = 1 + 0.4 cos θ + 0.3 sin θ`.
/// Not divergence free; the boundary estimates only use the Hölder bound on
/// `v_ν` and boundedness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderField {
    pub alpha: f64,
    /// Width of the band where the field is defined.
    pub band: f64,
    /// Scale of the normal component (`0` gives a purely tangential field).
    pub normal_scale: f64,
}

impl HolderField {
    pub fn new(alpha: f64, geom: &AnnulusGeometry) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Parameter(format!(
                "Hölder exponent {alpha} must lie in (0, 1]"
            )));
        }
        Ok(Self {
            alpha,
            band: 0.25 * (geom.outer - geom.rho),
            normal_scale: 1.0,
        })
    }

    pub fn g(theta: f64) -> f64 {
        1.0 + 0.5 * theta.sin() + 0.25 * theta.cos()
    }

    pub fn h(theta: f64) -> f64 {
        1.0 + 0.4 * theta.cos() + 0.3 * theta.sin()
    }

    /// `(v_ν, v_τ)` at distance `d` and angle `theta`.
    pub fn frame_components(&self, d: f64, theta: f64) -> (f64, f64) {
        (
            self.normal_scale * d.max(0.0).powf(self.alpha) * Self::g(theta),
            Self::h(theta),
        )
    }

    pub fn velocity(&self, x: [f64; 2], geom: &AnnulusGeometry) -> [f64; 2] {
        let f = boundary_distance(x, geom);
        let (vn, vt) = self.frame_components(f.distance, x[1].atan2(x[0]));
        [
            vn * f.normal[0] + vt * f.tangent[0],
            vn * f.normal[1] + vt * f.tangent[1],
        ]
    }

    /// `sup |v_ν| / d^α` (exact for the closed form: `sup g`).
    pub fn holder_constant(&self) -> f64 {
        self.normal_scale * (1.0 + 0.5_f64.hypot(0.25))
    }

    pub fn sup_norm(&self) -> f64 {
        let vn = self.holder_constant() * self.band.powf(self.alpha);
        let vt = 1.0 + 0.4_f64.hypot(0.3);
        vn.hypot(vt)
    }
}

/// Everything needed at one collar point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollarSample {
    pub frame: BoundaryFrame,
    pub r: f64,
    pub theta: f64,
    pub chi: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub psi: f64,
    pub grad_psi: [f64; 2],
    pub hess_psi: [[f64; 2]; 2],
    pub kappa: f64,
}

impl CollarSample {
    pub fn w(&self) -> [f64; 2] {
        [self.grad_psi[1], -self.grad_psi[0]]
    }

    /// `∂_b w_a`.
    pub fn grad_w(&self) -> [[f64; 2]; 2] {
        let h = &self.hess_psi;
        [[h[1][0], h[1][1]], [-h[0][0], -h[0][1]]]
    }

    pub fn w_nu(&self) -> f64 {
        dot(self.w(), self.frame.normal)
    }

    pub fn w_tau(&self) -> f64 {
        dot(self.w(), self.frame.tangent)
    }
}

/// The cut-off field `w_ε` for a given stream function and collar width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WEps {
    pub psi: StreamTestField,
    pub chi: CutoffChi,
    pub eps: f64,
    pub geom: AnnulusGeometry,
}

/// Rejects `eps` when the two collars `Γ_2ε` would touch.
pub fn build_w_eps(
    psi: StreamTestField,
    chi: CutoffChi,
    eps: f64,
    geom: &AnnulusGeometry,
) -> Result<WEps> {
    if !(eps > 0.0) || 4.0 * eps >= geom.outer - geom.rho {
        return Err(Error::CollarOverlap { eps });
    }
    Ok(WEps {
        psi,
        chi,
        eps,
        geom: *geom,
    })
}

impl WEps {
    pub fn sample(&self, x: [f64; 2], t: f64) -> CollarSample {
        let frame = boundary_distance(x, &self.geom);
        let (r, theta) = polar(x);
        let p = self.psi.polar(r, theta, t);
        let s = frame.distance / self.eps;
        CollarSample {
            frame,
            r,
            theta,
            chi: self.chi.value(s),
            chi1: self.chi.d1(s),
            chi2: self.chi.d2(s),
            psi: p.value,
            grad_psi: p.gradient(r, theta),
            hess_psi: p.hessian(r, theta),
            kappa: frame.curvature_at(r),
        }
    }

    /// Product-rule form `χ w + (χ'/ε) ψ ∇⊥d`.
    pub fn value(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let c = self.sample(x, t);
        let w = c.w();
        let perp_d = [-c.frame.tangent[0], -c.frame.tangent[1]];
        let k = c.chi1 / self.eps * c.psi;
        [c.chi * w[0] + k * perp_d[0], c.chi * w[1] + k * perp_d[1]]
    }

    /// `W = w_ε − w` from the product rule.
    pub fn difference(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let we = self.value(x, t);
        let w = self.psi.w(x, t);
        [we[0] - w[0], we[1] - w[1]]
    }

    /// `(W_ν, W_τ) = ((χ−1) w_ν, (χ−1) w_τ − (χ'/ε) ψ)`.
    pub fn difference_frame(&self, x: [f64; 2], t: f64) -> (f64, f64) {
        let c = self.sample(x, t);
        (
            (c.chi - 1.0) * c.w_nu(),
            (c.chi - 1.0) * c.w_tau() - c.chi1 / self.eps * c.psi,
        )
    }

    /// Frame-frozen derivatives `[[∂νW·ν, ∂νW·τ], [∂τW·ν, ∂τW·τ]]` from the
    /// closed forms in the module docs.
    pub fn frame_derivatives(&self, c: &CollarSample) -> [[f64; 2]; 2] {
        let eps = self.eps;
        let (nu, tau) = (c.frame.normal, c.frame.tangent);
        let gw = c.grad_w();
        let m = c.chi - 1.0;
        let a = c.chi1 / eps;
        [
            [
                a * c.w_nu() + m * bilinear(&gw, nu, nu),
                m * bilinear(&gw, tau, nu) + 2.0 * a * c.w_tau() - c.chi2 / (eps * eps) * c.psi,
            ],
            [
                m * bilinear(&gw, nu, tau) + c.kappa * a * c.psi,
                m * bilinear(&gw, tau, tau) - a * c.w_nu(),
            ],
        ]
    }

    /// Cartesian Jacobian `∂_b W_a` from the Hessian of `(χ − 1) ψ`.
    pub fn jacobian_direct(&self, c: &CollarSample) -> [[f64; 2]; 2] {
        let eps = self.eps;
        let nu = c.frame.normal;
        let tau = c.frame.tangent;
        let gp = c.grad_psi;
        let m = c.chi - 1.0;
        let a = c.chi1 / eps;
        let b = c.chi2 / (eps * eps);
        let mut hg = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                hg[i][j] = m * c.hess_psi[i][j]
                    + a * (nu[i] * gp[j] + gp[i] * nu[j])
                    + b * c.psi * nu[i] * nu[j]
                    + a * c.psi * c.kappa * tau[i] * tau[j];
            }
        }
        [[hg[1][0], hg[1][1]], [-hg[0][0], -hg[0][1]]]
    }

    /// Cartesian Jacobian of `W` by centered differences of [`Self::difference`].
    pub fn jacobian_fd(&self, x: [f64; 2], t: f64, h: f64) -> [[f64; 2]; 2] {
        let mut j = [[0.0; 2]; 2];
        for b in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[b] += h;
            xm[b] -= h;
            let (p, m) = (self.difference(xp, t), self.difference(xm, t));
            for a in 0..2 {
                j[a][b] = (p[a] - m[a]) / (2.0 * h);
            }
        }
        j
    }
}

/// Quadrature over both collars `Γ_2ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CollarQuadrature {
    /// Gauss nodes per distance panel (`[0, ε]` and `[ε, 2ε]`).
    pub n_d: usize,
    pub theta_cells: usize,
    pub theta_order: usize,
}

impl Default for CollarQuadrature {
    fn default() -> Self {
        Self {
            n_d: 32,
            theta_cells: 16,
            theta_order: 8,
        }
    }
}

impl CollarQuadrature {
    /// `(d, weight)` covering `[0, 2ε]`. On `[0, ε]` the substitution
    /// `d = ε u²` smooths the `d^α` factor of the Hölder field.
    pub fn distance_nodes(&self, eps: f64) -> Vec<(f64, f64)> {
        let rule = GaussLegendre::new(self.n_d);
        let mut out: Vec<(f64, f64)> = rule
            .mapped(0.0, 1.0)
            .map(|(u, w)| (eps * u * u, w * 2.0 * eps * u))
            .collect();
        out.extend(rule.mapped(eps, 2.0 * eps));
        out
    }

    pub fn theta_nodes(&self) -> Vec<(f64, f64)> {
        let rule = GaussLegendre::new(self.theta_order);
        let breaks = refine_breaks(&[0.0, TAU], self.theta_cells.max(1));
        crate::quadrature::composite_nodes(&rule, &breaks)
    }

    /// Area rule `(x, weight)` over both collars, inner first.
    pub fn nodes(&self, geom: &AnnulusGeometry, eps: f64) -> Vec<([f64; 2], f64)> {
        let dn = self.distance_nodes(eps);
        let tn = self.theta_nodes();
        let mut out = Vec::with_capacity(2 * dn.len() * tn.len());
        for comp in [BoundaryComponent::Inner, BoundaryComponent::Outer] {
            for &(d, wd) in &dn {
                let r = match comp {
                    BoundaryComponent::Inner => geom.rho + d,
                    BoundaryComponent::Outer => geom.outer - d,
                };
                for &(th, wt) in &tn {
                    let (s, c) = th.sin_cos();
                    out.push(([r * c, r * s], wd * wt * r));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ITerms {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    /// `∫ (v·∇W)·v` from the Cartesian Jacobian, for the consistency check.
    pub direct: f64,
}

impl ITerms {
    pub fn as_array(&self) -> [f64; 4] {
        [self.i1, self.i2, self.i3, self.i4]
    }

    pub fn sum(&self) -> f64 {
        self.i1 + self.i2 + self.i3 + self.i4
    }
}

/// `I1 = ∫ v_ν ∂νW_ν v_ν`, `I2 = ∫ v_ν ∂νW_τ v_τ`, `I3 = ∫ v_τ ∂τW_ν v_ν`,
/// `I4 = ∫ v_τ ∂τW_τ v_τ` over `Γ_2ε` at time `t`.
pub fn compute_i_terms(
    v: &HolderField,
    w_eps: &WEps,
    t: f64,
    quad: &CollarQuadrature,
) -> Result<ITerms> {
    if 2.0 * w_eps.eps > v.band {
        return Err(Error::Parameter(format!(
            "collar 2*eps={} exceeds the velocity band {}",
            2.0 * w_eps.eps,
            v.band
        )));
    }
    let nodes = quad.nodes(&w_eps.geom, w_eps.eps);
    let parts: Vec<[f64; 5]> = nodes
        .par_iter()
        .map(|&(x, wt)| {
            let c = w_eps.sample(x, t);
            let (vn, vt) = v.frame_components(c.frame.distance, c.theta);
            let dw = w_eps.frame_derivatives(&c);
            let vel = [
                vn * c.frame.normal[0] + vt * c.frame.tangent[0],
                vn * c.frame.normal[1] + vt * c.frame.tangent[1],
            ];
            let direct = bilinear(&w_eps.jacobian_direct(&c), vel, vel);
            [
                wt * vn * dw[0][0] * vn,
                wt * vn * dw[0][1] * vt,
                wt * vt * dw[1][0] * vn,
                wt * vt * dw[1][1] * vt,
                wt * direct,
            ]
        })
        .collect();
    let col = |k: usize| neumaier_sum(parts.iter().map(|p| p[k]));
    Ok(ITerms {
        i1: col(0),
        i2: col(1),
        i3: col(2),
        i4: col(3),
        direct: col(4),
    })
}

/// `‖w_ε − w‖_{L²(Ω)}` at time `t`; the difference vanishes outside `Γ_2ε`.
pub fn strong_difference_norm(w_eps: &WEps, t: f64, quad: &CollarQuadrature) -> f64 {
    let nodes = quad.nodes(&w_eps.geom, w_eps.eps);
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|&(x, wt)| {
            let (a, b) = w_eps.difference_frame(x, t);
            wt * (a * a + b * b)
        })
        .collect();
    neumaier_sum(vals).sqrt()
}

/// Observed `sup |ψ| / d` and `sup |w_ν| / d` over the collar nodes and times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StreamConstants {
    pub psi_over_d: f64,
    pub w_nu_over_d: f64,
}

pub fn stream_constants(
    psi: &StreamTestField,
    geom: &AnnulusGeometry,
    width: f64,
    times: &[f64],
    quad: &CollarQuadrature,
) -> StreamConstants {
    let w = WEps {
        psi: *psi,
        chi: CutoffChi,
        eps: 0.5 * width,
        geom: *geom,
    };
    let mut c1 = 0.0_f64;
    let mut c2 = 0.0_f64;
    for &t in times {
        for (x, _) in quad.nodes(geom, 0.5 * width) {
            let c = w.sample(x, t);
            let d = c.frame.distance;
            if d > 0.0 {
                c1 = c1.max(c.psi.abs() / d);
                c2 = c2.max(c.w_nu().abs() / d);
            }
        }
    }
    StreamConstants {
        psi_over_d: c1,
        w_nu_over_d: c2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermFit {
    pub values: Vec<f64>,
    pub predicted: f64,
    /// `None` when every value is below [`ZERO_FLOOR`].
    pub slope: Option<f64>,
    /// Slope meets `predicted − tolerance`, or the term vanishes identically.
    pub passed: bool,
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub holder_alpha: f64,
    pub eps: Vec<f64>,
    pub times: Vec<f64>,
    pub tolerance: f64,
    pub terms: [TermFit; 4],
    /// `max_t |ΣI_k − direct|` per ε.
    pub consistency: Vec<f64>,
    /// `max_t ‖w_ε − w‖_{L²}` per ε.
    pub strong_norms: Vec<f64>,
    pub strong_slope: Option<f64>,
}

impl ScalingReport {
    pub fn max_consistency(&self) -> f64 {
        self.consistency.iter().copied().fold(0.0, f64::max)
    }
}

/// Upper-bound exponents `(2α + 1, α, α + 1, 1)`.
pub fn predicted_exponents(alpha: f64) -> [f64; 4] {
    [2.0 * alpha + 1.0, alpha, alpha + 1.0, 1.0]
}

/// `max_t |I_k|` on each ε of a geometric sequence with fitted slopes.
pub fn scaling_study(
    v: &HolderField,
    psi: &StreamTestField,
    geom: &AnnulusGeometry,
    eps_grid: &[f64],
    times: &[f64],
    quad: &CollarQuadrature,
    tolerance: f64,
) -> Result<ScalingReport> {
    if eps_grid.len() < 4 {
        return Err(Error::Sweep("need at least 4 eps values".into()));
    }
    if eps_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Sweep("eps grid must be strictly decreasing".into()));
    }
    let q = eps_grid[1] / eps_grid[0];
    if eps_grid
        .windows(2)
        .any(|w| ((w[1] / w[0]) - q).abs() > 1e-9 * q)
    {
        return Err(Error::Sweep("eps grid must be geometric".into()));
    }
    if times.is_empty() {
        return Err(Error::Sweep("no sample times".into()));
    }
    let mut abs_terms = vec![[0.0_f64; 4]; eps_grid.len()];
    let mut consistency = vec![0.0_f64; eps_grid.len()];
    let mut strong = vec![0.0_f64; eps_grid.len()];
    for (k, &eps) in eps_grid.iter().enumerate() {
        let w = build_w_eps(*psi, CutoffChi, eps, geom)?;
        for &t in times {
            let it = compute_i_terms(v, &w, t, quad)?;
            for (slot, val) in abs_terms[k].iter_mut().zip(it.as_array()) {
                *slot = slot.max(val.abs());
            }
            consistency[k] = consistency[k].max((it.sum() - it.direct).abs());
            strong[k] = strong[k].max(strong_difference_norm(&w, t, quad));
        }
    }
    let predicted = predicted_exponents(v.alpha);
    let terms = std::array::from_fn(|j| {
        let values: Vec<f64> = abs_terms.iter().map(|a| a[j]).collect();
        let vacuous = values.iter().all(|&x| x < ZERO_FLOOR);
        let slope = loglog_slope(eps_grid, &values, ZERO_FLOOR);
        let passed = vacuous || slope.is_some_and(|s| s >= predicted[j] - tolerance);
        TermFit {
            values,
            predicted: predicted[j],
            slope,
            passed,
            vacuous,
        }
    });
    Ok(ScalingReport {
        holder_alpha: v.alpha,
        eps: eps_grid.to_vec(),
        times: times.to_vec(),
        tolerance,
        terms,
        consistency,
        strong_slope: loglog_slope(eps_grid, &strong, ZERO_FLOOR),
        strong_norms: strong,
    })
}
