//! Parametric library of compactly supported test functions with analytically
//! coded derivatives.
//!
//! The reference library uses piecewise-polynomial profiles: they are `C^k`
//! rather than `C^∞`, which is enough for the weak formulation, and they are
//! polynomial on each piece, so Gauss rules aligned with [`Profile::kinks`]
//! converge at their full algebraic rate instead of fighting the essential
//! singularity of `exp(-1/x)` at the support ends.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::AnnulusGeometry;
use crate::jet::{Jet, PolarDerivs};

/// One-dimensional building block, evaluated as a second-order jet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Profile {
    /// `exp(1 - 1/(1 - s^2))`, `s = (x - center)/half_width`; peak value 1.
    Bump { center: f64, half_width: f64 },
    /// Smoothed indicator of `[lo, hi]` with C-infinity ramps of width `ramp`.
    Plateau { lo: f64, hi: f64, ramp: f64 },
    /// `(1 - s^2)^power (1 + skew s)`, `C^(power-1)` at the support ends.
    PolyBump {
        center: f64,
        half_width: f64,
        power: i32,
        skew: f64,
    },
    /// Indicator of `[lo, hi]` with `C^3` septic smoothstep ramps of width `ramp`.
    PolyPlateau { lo: f64, hi: f64, ramp: f64 },
    /// `a0 + sum a_k cos(k x) + b_k sin(k x)` over `(k, a_k, b_k)`.
    Trig { a0: f64, terms: Vec<(f64, f64, f64)> },
    Constant(f64),
}

impl Profile {
    pub fn jet(&self, x: f64) -> Jet {
        match *self {
            Profile::Bump { center, half_width } => {
                let s = (x - center) / half_width;
                if s.abs() >= 1.0 {
                    return Jet::ZERO;
                }
                let sj = Jet {
                    v: s,
                    d1: 1.0 / half_width,
                    d2: 0.0,
                };
                let one_minus = -(sj * sj) + 1.0;
                (-one_minus.recip() + 1.0).exp()
            }
            Profile::Plateau { lo, hi, ramp } => {
                let up = Jet {
                    v: (x - (lo - ramp)) / ramp,
                    d1: 1.0 / ramp,
                    d2: 0.0,
                };
                let down = Jet {
                    v: ((hi + ramp) - x) / ramp,
                    d1: -1.0 / ramp,
                    d2: 0.0,
                };
                smooth_step(up) * smooth_step(down)
            }
            Profile::PolyBump {
                center,
                half_width,
                power,
                skew,
            } => {
                let s = (x - center) / half_width;
                if s.abs() >= 1.0 {
                    return Jet::ZERO;
                }
                let p = power as f64;
                let g = 1.0 - s * s;
                let g1 = -2.0 * s / half_width;
                let g2 = -2.0 / (half_width * half_width);
                let base = Jet {
                    v: g.powi(power),
                    d1: p * g.powi(power - 1) * g1,
                    d2: p * (p - 1.0) * g.powi(power - 2) * g1 * g1 + p * g.powi(power - 1) * g2,
                };
                let tilt = Jet {
                    v: 1.0 + skew * s,
                    d1: skew / half_width,
                    d2: 0.0,
                };
                base * tilt
            }
            Profile::PolyPlateau { lo, hi, ramp } => {
                let up = septic_step((x - (lo - ramp)) / ramp, 1.0 / ramp);
                let down = septic_step(((hi + ramp) - x) / ramp, -1.0 / ramp);
                up * down
            }
            Profile::Trig { a0, ref terms } => {
                let mut acc = Jet::constant(a0);
                for &(k, a, b) in terms {
                    let kx = Jet::var(x).scale(k);
                    acc = acc + kx.cos().scale(a) + kx.sin().scale(b);
                }
                acc
            }
            Profile::Constant(c) => Jet::constant(c),
        }
    }

    /// Closed support interval, `None` when unbounded.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Profile::Bump { center, half_width } => {
                Some((center - half_width, center + half_width))
            }
            Profile::PolyBump {
                center, half_width, ..
            } => Some((center - half_width, center + half_width)),
            Profile::Plateau { lo, hi, ramp } | Profile::PolyPlateau { lo, hi, ramp } => {
                Some((lo - ramp, hi + ramp))
            }
            Profile::Trig { .. } | Profile::Constant(_) => None,
        }
    }

    /// Support ends and kinks lying in `[lo, hi]`: the points where the
    /// profile is not analytic.
    pub fn singular_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = self.kinks();
        if let Some((a, b)) = self.support() {
            pts.push(a);
            pts.push(b);
        }
        pts.retain(|&x| x > lo && x < hi);
        pts
    }

    /// Points inside the support where the profile changes formula.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            Profile::Plateau { lo, hi, .. } | Profile::PolyPlateau { lo, hi, .. } => vec![lo, hi],
            _ => Vec::new(),
        }
    }
}

/// `35u^4 - 84u^5 + 70u^6 - 20u^7` clamped to `[0, 1]`, with `du/dx = slope`.
fn septic_step(u: f64, slope: f64) -> Jet {
    if u <= 0.0 {
        return Jet::ZERO;
    }
    if u >= 1.0 {
        return Jet::constant(1.0);
    }
    let u3 = u * u * u;
    let v = u3 * u * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)));
    // derivative 140 u^3 (1-u)^3, second derivative 420 u^2 (1-u)^2 (1-2u)
    let w = 1.0 - u;
    let d1 = 140.0 * u3 * w * w * w;
    let d2 = 420.0 * u * u * w * w * (1.0 - 2.0 * u);
    Jet {
        v,
        d1: d1 * slope,
        d2: d2 * slope * slope,
    }
}

/// C-infinity step from 0 (u <= 0) to 1 (u >= 1).
fn smooth_step(u: Jet) -> Jet {
    if u.v <= 0.0 {
        return Jet::ZERO;
    }
    if u.v >= 1.0 {
        return Jet::constant(1.0);
    }
    let e = |z: Jet| (-z.recip()).exp();
    let a = e(u);
    let b = e(-u + 1.0);
    a * (a + b).recip()
}

/// `amplitude * A(r) B(theta) C(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparableField {
    pub radial: Profile,
    pub angular: Profile,
    pub temporal: Profile,
    pub amplitude: f64,
}

/// Spatial derivatives of a scalar field and of its time derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSample {
    pub spatial: PolarDerivs,
    pub time_derivative: PolarDerivs,
}

impl SeparableField {
    pub fn new(radial: Profile, angular: Profile, temporal: Profile) -> Self {
        Self {
            radial,
            angular,
            temporal,
            amplitude: 1.0,
        }
    }

    /// Time-independent field.
    pub fn spatial(radial: Profile, angular: Profile) -> Self {
        Self::new(radial, angular, Profile::Constant(1.0))
    }

    pub fn eval(&self, r: f64, theta: f64, t: f64) -> ScalarSample {
        let base = PolarDerivs::separable(self.radial.jet(r), self.angular.jet(theta));
        let c = self.temporal.jet(t);
        ScalarSample {
            spatial: base.scale(self.amplitude * c.v),
            time_derivative: base.scale(self.amplitude * c.d1),
        }
    }

    pub fn value(&self, r: f64, theta: f64, t: f64) -> f64 {
        self.eval(r, theta, t).spatial.value
    }

    pub fn radial_support(&self) -> Option<(f64, f64)> {
        self.radial.support()
    }

    pub fn time_support(&self) -> Option<(f64, f64)> {
        self.temporal.support()
    }
}

/// Values and first derivatives of a vector test field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorSample {
    pub value: [f64; 2],
    pub time_derivative: [f64; 2],
    /// `jacobian[i][j] = d phi_i / d x_j`.
    pub jacobian: [[f64; 2]; 2],
    pub divergence: f64,
}

/// Vector-valued test field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TestField {
    /// `S(r, theta, t) e` for a fixed Cartesian direction `e`.
    Directional {
        scalar: SeparableField,
        direction: [f64; 2],
    },
    /// `(dS/dy, -dS/dx)`, exactly divergence free.
    PerpGradient { scalar: SeparableField },
}

impl TestField {
    pub fn scalar(&self) -> &SeparableField {
        match self {
            TestField::Directional { scalar, .. } | TestField::PerpGradient { scalar } => scalar,
        }
    }

    /// Same field with the time factor replaced by 1.
    pub fn frozen(&self) -> TestField {
        let mut out = self.clone();
        match &mut out {
            TestField::Directional { scalar, .. } | TestField::PerpGradient { scalar } => {
                scalar.temporal = Profile::Constant(1.0);
            }
        }
        out
    }

    pub fn eval(&self, r: f64, theta: f64, t: f64) -> VectorSample {
        let s = self.scalar().eval(r, theta, t);
        let grad = s.spatial.gradient(r, theta);
        let grad_t = s.time_derivative.gradient(r, theta);
        match self {
            TestField::Directional { direction: e, .. } => VectorSample {
                value: [s.spatial.value * e[0], s.spatial.value * e[1]],
                time_derivative: [s.time_derivative.value * e[0], s.time_derivative.value * e[1]],
                jacobian: [
                    [e[0] * grad[0], e[0] * grad[1]],
                    [e[1] * grad[0], e[1] * grad[1]],
                ],
                divergence: e[0] * grad[0] + e[1] * grad[1],
            },
            TestField::PerpGradient { .. } => {
                let h = s.spatial.hessian(r, theta);
                VectorSample {
                    value: [grad[1], -grad[0]],
                    time_derivative: [grad_t[1], -grad_t[0]],
                    jacobian: [[h[1][0], h[1][1]], [-h[0][0], -h[0][1]]],
                    divergence: 0.0,
                }
            }
        }
    }

    /// Checks that the radial support keeps `margin` from both boundary circles
    /// and that the time support ends before the horizon. The time support may
    /// start before `t = 0`, in which case the initial trace enters the weak form.
    pub fn check_support(&self, geom: &AnnulusGeometry, margin: f64) -> Result<()> {
        let sc = self.scalar();
        let (r_lo, r_hi) = sc
            .radial_support()
            .ok_or_else(|| Error::Support("radial profile is not compactly supported".into()))?;
        if r_lo < geom.rho + margin || r_hi > geom.outer - margin {
            return Err(Error::Support(format!(
                "radial support [{r_lo}, {r_hi}] not inside [{}, {}]",
                geom.rho + margin,
                geom.outer - margin
            )));
        }
        let (_, t_hi) = sc
            .time_support()
            .ok_or_else(|| Error::Support("temporal profile is not compactly supported".into()))?;
        if t_hi >= geom.horizon {
            return Err(Error::Support(format!(
                "time support ends at {t_hi}, not before T={}",
                geom.horizon
            )));
        }
        Ok(())
    }
}

/// The five reference test fields used by the residual studies, placed
/// relative to the geometry.
pub fn library(geom: &AnnulusGeometry) -> Vec<(&'static str, TestField)> {
    let len = geom.outer - geom.rho;
    let horizon = geom.horizon;
    let trig = |a0: f64, terms: &[(f64, f64, f64)]| Profile::Trig {
        a0,
        terms: terms.to_vec(),
    };
    vec![
        (
            "stationary_inner",
            TestField::Directional {
                scalar: SeparableField::new(
                    Profile::PolyBump { power: 4, skew: 0.0,
                        center: geom.rho + 0.2 * len,
                        half_width: 0.12 * len,
                    },
                    trig(1.0, &[(1.0, 0.5, 0.0), (2.0, 0.0, 0.3)]),
                    Profile::PolyBump { power: 4, skew: 0.0,
                        center: 0.5 * horizon,
                        half_width: 0.3 * horizon,
                    },
                ),
                direction: [1.0, 0.0],
            },
        ),
        (
            "fan_crossing",
            TestField::Directional {
                scalar: SeparableField::new(
                    Profile::PolyBump { power: 4, skew: 0.0,
                        center: geom.r0,
                        half_width: 0.25 * len.min(2.0 * (geom.r0 - geom.rho)).min(2.0 * (geom.outer - geom.r0)),
                    },
                    trig(0.5, &[(1.0, 1.0, -0.4)]),
                    Profile::PolyBump { power: 4, skew: 0.0,
                        center: 0.5 * horizon,
                        half_width: 0.35 * horizon,
                    },
                ),
                direction: [0.6, 0.8],
            },
        ),
        (
            "perp_gradient",
            TestField::PerpGradient {
                scalar: SeparableField::new(
                    Profile::PolyBump { power: 4, skew: 0.0,
                        center: geom.r0,
                        half_width: 0.3 * (geom.r0 - geom.rho).min(geom.outer - geom.r0) * 2.0,
                    },
                    trig(1.0, &[(2.0, 0.7, 0.0), (1.0, 0.0, 0.2)]),
                    Profile::PolyBump { power: 4, skew: 0.0,
                        center: 0.45 * horizon,
                        half_width: 0.4 * horizon,
                    },
                ),
            },
        ),
        (
            "initial_trace",
            TestField::Directional {
                scalar: SeparableField::new(
                    Profile::PolyPlateau {
                        lo: geom.r0 - 0.3 * (geom.r0 - geom.rho),
                        hi: geom.r0 + 0.3 * (geom.outer - geom.r0),
                        ramp: 0.2 * (geom.r0 - geom.rho).min(geom.outer - geom.r0),
                    },
                    trig(0.0, &[(1.0, 1.0, 1.0)]),
                    Profile::PolyBump { power: 4, skew: 0.0,
                        center: 0.0,
                        half_width: 0.6 * horizon,
                    },
                ),
                direction: [1.0, -0.5],
            },
        ),
        (
            "perp_plateau_initial",
            TestField::PerpGradient {
                scalar: SeparableField::new(
                    Profile::PolyPlateau {
                        lo: geom.rho + 0.2 * len,
                        hi: geom.outer - 0.2 * len,
                        ramp: 0.1 * len,
                    },
                    trig(0.3, &[(1.0, 0.0, 1.0), (3.0, 0.5, 0.0)]),
                    Profile::PolyBump { power: 4, skew: 0.0,
                        center: 0.0,
                        half_width: 0.8 * horizon,
                    },
                ),
            },
        ),
    ]
}

/// Smooth scalar fields for the divergence test, time independent.
pub fn scalar_library(geom: &AnnulusGeometry) -> Vec<(&'static str, SeparableField)> {
    let len = geom.outer - geom.rho;
    vec![
        (
            "radial_bump",
            SeparableField::spatial(
                Profile::PolyBump { power: 4, skew: 0.0,
                    center: geom.rho + 0.5 * len,
                    half_width: 0.4 * len,
                },
                Profile::Constant(1.0),
            ),
        ),
        (
            "angular_bump",
            SeparableField::spatial(
                Profile::PolyBump { power: 4, skew: 0.0,
                    center: geom.rho + 0.4 * len,
                    half_width: 0.3 * len,
                },
                Profile::Trig {
                    a0: 0.2,
                    terms: vec![(1.0, 1.0, 0.5), (3.0, 0.0, 0.7)],
                },
            ),
        ),
    ]
}

/// Random scalar field for property tests, built from uniform samples `u` in
/// `[0, 1)`. The angular factor is a bump inside `(0, 2pi)`, so its angular
/// integrals converge algebraically rather than spectrally.
pub fn random_scalar(geom: &AnnulusGeometry, u: &[f64; 6]) -> SeparableField {
    let len = geom.outer - geom.rho;
    let half_width = (0.1 + 0.3 * u[0]) * len;
    let center = geom.rho + half_width + 1e-3 * len + u[1] * (len - 2.0 * half_width - 2e-3 * len);
    let mut field = SeparableField::spatial(
        Profile::PolyBump {
            center,
            half_width,
            power: 4, skew: 0.0,
        },
        Profile::PolyBump {
            center: 2.0 + 2.2 * u[2],
            half_width: 0.8 + 0.6 * u[3],
            power: 4 + (u[5] * 3.0).floor() as i32,
            skew: 0.2 + 0.4 * u[5],
        },
    );
    field.amplitude = 0.5 + u[4];
    field
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fd_check(field: &TestField, r: f64, th: f64, t: f64) {
        let h = 1e-5;
        let s = field.eval(r, th, t);
        let x = [r * th.cos(), r * th.sin()];
        let at = |p: [f64; 2], t: f64| {
            let q = crate::geometry::cartesian_to_polar(p);
            field.eval(q.r, q.theta, t).value
        };
        let scale = 1.0 + s.jacobian.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let (vp, vm) = (at(xp, t), at(xm, t));
            for i in 0..2 {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                assert!((fd - s.jacobian[i][j]).abs() < 1e-6 * scale, "{i}{j}: {fd} vs {}", s.jacobian[i][j]);
            }
        }
        let vp = at(x, t + h);
        let vm = at(x, t - h);
        for i in 0..2 {
            let fd = (vp[i] - vm[i]) / (2.0 * h);
            let sc = 1.0 + s.time_derivative[i].abs();
            assert!((fd - s.time_derivative[i]).abs() < 1e-6 * sc);
        }
        assert_abs_diff_eq!(s.divergence, s.jacobian[0][0] + s.jacobian[1][1], epsilon = 1e-10 * scale);
    }

    #[test]
    fn library_derivatives_match_finite_differences() {
        let geom = AnnulusGeometry::default();
        for (_, f) in library(&geom) {
            let (r_lo, r_hi) = f.scalar().radial_support().unwrap();
            // offsets keep the points off the profile kinks, where one-sided
            // third derivatives differ and centered differences lose accuracy
            for k in 1..8 {
                let r = r_lo + (r_hi - r_lo) * (k as f64 + 0.37) / 8.6;
                let th = 0.7 * k as f64;
                let t = 0.05 + 0.1 * k as f64;
                fd_check(&f, r, th, t);
            }
        }
    }

    #[test]
    fn library_fields_are_supported_inside() {
        let geom = AnnulusGeometry::default();
        for (name, f) in library(&geom) {
            f.check_support(&geom, 1e-3).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn support_violation_rejected() {
        let geom = AnnulusGeometry::default();
        let f = TestField::Directional {
            scalar: SeparableField::new(
                Profile::Bump {
                    center: 1.05,
                    half_width: 0.1,
                },
                Profile::Constant(1.0),
                Profile::Bump {
                    center: 0.5,
                    half_width: 0.2,
                },
            ),
            direction: [1.0, 0.0],
        };
        assert!(matches!(f.check_support(&geom, 0.0), Err(Error::Support(_))));
        let g = TestField::PerpGradient {
            scalar: SeparableField::new(
                Profile::Bump {
                    center: 1.5,
                    half_width: 0.1,
                },
                Profile::Constant(1.0),
                Profile::Bump {
                    center: 0.9,
                    half_width: 0.2,
                },
            ),
        };
        assert!(g.check_support(&geom, 0.0).is_err());
    }

    #[test]
    fn plateau_is_one_inside_and_zero_outside() {
        let p = Profile::Plateau {
            lo: 1.2,
            hi: 1.8,
            ramp: 0.1,
        };
        assert_eq!(p.jet(1.5).v, 1.0);
        assert_eq!(p.jet(1.05).v, 0.0);
        assert_eq!(p.jet(1.95).v, 0.0);
        let mid = p.jet(1.15).v;
        assert!((mid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn perp_gradient_is_divergence_free() {
        let geom = AnnulusGeometry::default();
        for (_, f) in library(&geom) {
            if let TestField::PerpGradient { .. } = f {
                let s = f.eval(1.4, 0.3, 0.2);
                assert!((s.jacobian[0][0] + s.jacobian[1][1]).abs() < 1e-10);
            }
        }
    }
}
