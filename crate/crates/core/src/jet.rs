//! Second-order forward-mode jets for building test functions with exact
//! derivatives, and the polar-to-Cartesian conversion of gradients and Hessians.

use std::ops::{Add, Mul, Neg, Sub};

/// Value with first and second derivative along one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const ZERO: Jet = Jet {
        v: 0.0,
        d1: 0.0,
        d2: 0.0,
    };

    pub fn constant(v: f64) -> Self {
        Self { v, d1: 0.0, d2: 0.0 }
    }

    /// The independent variable itself.
    pub fn var(x: f64) -> Self {
        Self {
            v: x,
            d1: 1.0,
            d2: 0.0,
        }
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            v: k * self.v,
            d1: k * self.d1,
            d2: k * self.d2,
        }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        Self {
            v: e,
            d1: self.d1 * e,
            d2: (self.d2 + self.d1 * self.d1) * e,
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        Self {
            v: s,
            d1: self.d1 * c,
            d2: self.d2 * c - self.d1 * self.d1 * s,
        }
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        Self {
            v: c,
            d1: -self.d1 * s,
            d2: -self.d2 * s - self.d1 * self.d1 * c,
        }
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        Self {
            v: inv,
            d1: -self.d1 * inv * inv,
            d2: (2.0 * self.d1 * self.d1 * inv - self.d2) * inv * inv,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet {
            v: self.v - o.v,
            d1: self.d1 - o.d1,
            d2: self.d2 - o.d2,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet { v: self.v + c, ..self }
    }
}

/// Derivatives of a scalar `S(r, theta)` in polar coordinates, up to order two.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarDerivs {
    pub value: f64,
    pub dr: f64,
    pub dth: f64,
    pub drr: f64,
    pub drth: f64,
    pub dthth: f64,
}

impl PolarDerivs {
    /// Product of a radial and an angular jet.
    pub fn separable(radial: Jet, angular: Jet) -> Self {
        Self {
            value: radial.v * angular.v,
            dr: radial.d1 * angular.v,
            dth: radial.v * angular.d1,
            drr: radial.d2 * angular.v,
            drth: radial.d1 * angular.d1,
            dthth: radial.v * angular.d2,
        }
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            value: k * self.value,
            dr: k * self.dr,
            dth: k * self.dth,
            drr: k * self.drr,
            drth: k * self.drth,
            dthth: k * self.dthth,
        }
    }

    /// Cartesian gradient at `(r, theta)`.
    pub fn gradient(&self, r: f64, theta: f64) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        let gr = self.dr;
        let gt = self.dth / r;
        [gr * c - gt * s, gr * s + gt * c]
    }

    /// Cartesian Hessian `[[S_xx, S_xy], [S_xy, S_yy]]` at `(r, theta)`.
    pub fn hessian(&self, r: f64, theta: f64) -> [[f64; 2]; 2] {
        let (s, c) = theta.sin_cos();
        let er = [c, s];
        let et = [-s, c];
        let hrr = self.drr;
        let hrt = self.drth / r - self.dth / (r * r);
        let htt = self.dr / r + self.dthth / (r * r);
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = hrr * er[i] * er[j]
                    + hrt * (er[i] * et[j] + et[i] * er[j])
                    + htt * et[i] * et[j];
            }
        }
        h
    }
}

impl Add for PolarDerivs {
    type Output = PolarDerivs;
    fn add(self, o: PolarDerivs) -> PolarDerivs {
        PolarDerivs {
            value: self.value + o.value,
            dr: self.dr + o.dr,
            dth: self.dth + o.dth,
            drr: self.drr + o.drr,
            drth: self.drth + o.drth,
            dthth: self.dthth + o.dthth,
        }
    }
}
