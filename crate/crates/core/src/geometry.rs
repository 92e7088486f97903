//! Annulus geometry, parameter admissibility and polar coordinates.
//!
//! Every other module works on the annulus `rho < |x| < R` with an interface
//! circle `|x| = r0` where the initial swirl flips sign, over the time window
//! `[0, T]`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The annulus `rho < |x| < outer` with interface radius `r0` and horizon `horizon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusGeometry {
    pub rho: f64,
    pub outer: f64,
    pub r0: f64,
    pub horizon: f64,
}

impl AnnulusGeometry {
    pub fn new(rho: f64, outer: f64, r0: f64, horizon: f64) -> Result<Self> {
        let geom = Self {
            rho,
            outer,
            r0,
            horizon,
        };
        geom.check()?;
        Ok(geom)
    }

    /// Checks `0 < rho < r0 < R < inf` and `T > 0`.
    pub fn check(&self) -> Result<()> {
        let all_finite = [self.rho, self.outer, self.r0, self.horizon]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Geometry("non-finite value".into()));
        }
        if self.rho <= 0.0 {
            return Err(Error::Geometry(format!("rho={} must be positive", self.rho)));
        }
        if self.rho >= self.outer {
            return Err(Error::Geometry(format!(
                "rho={} must be smaller than R={}",
                self.rho, self.outer
            )));
        }
        if !(self.rho < self.r0 && self.r0 < self.outer) {
            return Err(Error::Geometry(format!(
                "r0={} must lie strictly inside ({}, {})",
                self.r0, self.rho, self.outer
            )));
        }
        if self.horizon <= 0.0 {
            return Err(Error::Geometry(format!(
                "T={} must be positive",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Area `pi (R^2 - rho^2)`.
    pub fn area(&self) -> f64 {
        PI * (self.outer * self.outer - self.rho * self.rho)
    }

    pub fn contains(&self, r: f64) -> bool {
        self.rho < r && r < self.outer
    }

    /// Radius of the medial circle, equidistant from both boundary components.
    pub fn medial_radius(&self) -> f64 {
        0.5 * (self.rho + self.outer)
    }
}

impl Default for AnnulusGeometry {
    fn default() -> Self {
        Self {
            rho: 1.0,
            outer: 2.0,
            r0: 1.5,
            horizon: 1.0,
        }
    }
}

/// Turbulent propagation speed `lambda` and dissipation rate `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsolutionParams {
    pub lambda: f64,
    pub epsilon: f64,
}

impl Default for SubsolutionParams {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            epsilon: 0.5,
        }
    }
}

/// One violated inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    /// Which parameter violates the bound (`"lambda"` or `"epsilon"`).
    pub parameter: &'static str,
    pub value: f64,
    /// Human readable inequality, e.g. `0 < lambda < 0.25`.
    pub inequality: String,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `min{1/R^2, (r0-rho)/T, (R-r0)/T}`.
    pub lambda_bound: f64,
    /// `1/(1 - rho^2 lambda)`; only meaningful when `rho^2 lambda < 1`.
    pub epsilon_bound: f64,
    pub violations: Vec<BoundViolation>,
    /// `epsilon < 1`, required for the strict inequality inside the fan.
    pub strict_epsilon: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Upper bound on the turbulent speed.
pub fn lambda_bound(geom: &AnnulusGeometry) -> f64 {
    let a = 1.0 / (geom.outer * geom.outer);
    let b = (geom.r0 - geom.rho) / geom.horizon;
    let c = (geom.outer - geom.r0) / geom.horizon;
    a.min(b).min(c)
}

/// Upper bound on the dissipation rate keeping the prescribed energy positive.
pub fn epsilon_bound(geom: &AnnulusGeometry, lambda: f64) -> f64 {
    1.0 / (1.0 - geom.rho * geom.rho * lambda)
}

pub fn validate_params(
    geom: &AnnulusGeometry,
    params: &SubsolutionParams,
) -> Result<ValidationReport> {
    geom.check()?;
    let lam_bound = lambda_bound(geom);
    let eps_bound = epsilon_bound(geom, params.lambda);
    let mut violations = Vec::new();

    if !(params.lambda > 0.0 && params.lambda < lam_bound) {
        violations.push(BoundViolation {
            parameter: "lambda",
            value: params.lambda,
            inequality: format!("0 < lambda < {lam_bound}"),
            bound: lam_bound,
        });
    }
    if !(params.epsilon >= 0.0 && params.epsilon < eps_bound) {
        violations.push(BoundViolation {
            parameter: "epsilon",
            value: params.epsilon,
            inequality: format!("0 <= epsilon < {eps_bound}"),
            bound: eps_bound,
        });
    }

    Ok(ValidationReport {
        lambda_bound: lam_bound,
        epsilon_bound: eps_bound,
        violations,
        strict_epsilon: params.epsilon < 1.0,
    })
}

/// Polar coordinates with `theta` normalized to `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        Self {
            r,
            theta: normalize_angle(theta),
        }
    }

    pub fn to_cartesian(self) -> [f64; 2] {
        polar_to_cartesian(self)
    }
}

pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

pub fn cartesian_to_polar(x: [f64; 2]) -> PolarPoint {
    PolarPoint::new(x[0].hypot(x[1]), x[1].atan2(x[0]))
}

pub fn polar_to_cartesian(p: PolarPoint) -> [f64; 2] {
    let (s, c) = p.theta.sin_cos();
    [p.r * c, p.r * s]
}

/// Which boundary circle a point is closest to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryComponent {
    Inner,
    Outer,
}

/// Distance to the boundary together with the local boundary frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub distance: f64,
    pub component: BoundaryComponent,
    /// Closest boundary point.
    pub nearest: [f64; 2],
    /// Unit normal at `nearest`, pointing into the annulus.
    pub normal: [f64; 2],
    /// `(-nu_2, nu_1)`.
    pub tangent: [f64; 2],
}

impl BoundaryFrame {
    /// Signed curvature `kappa` with `d(nu)/d(tau) = kappa tau`: `1/r` near the
    /// inner circle and `-1/r` near the outer one.
    pub fn curvature_at(&self, r: f64) -> f64 {
        match self.component {
            BoundaryComponent::Inner => 1.0 / r,
            BoundaryComponent::Outer => -1.0 / r,
        }
    }
}

/// Closest-point data for `x`; ties on the medial circle go to the inner circle.
pub fn boundary_distance(x: [f64; 2], geom: &AnnulusGeometry) -> BoundaryFrame {
    let r = x[0].hypot(x[1]);
    let e_r = if r > 0.0 { [x[0] / r, x[1] / r] } else { [1.0, 0.0] };
    let d_inner = r - geom.rho;
    let d_outer = geom.outer - r;
    let (distance, component, radius, normal) = if d_inner <= d_outer {
        (d_inner, BoundaryComponent::Inner, geom.rho, e_r)
    } else {
        (d_outer, BoundaryComponent::Outer, geom.outer, [-e_r[0], -e_r[1]])
    };
    BoundaryFrame {
        distance,
        component,
        nearest: [radius * e_r[0], radius * e_r[1]],
        normal,
        tangent: [-normal[1], normal[0]],
    }
}
