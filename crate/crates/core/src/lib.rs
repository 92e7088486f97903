//! Construction and numerical verification of rotational subsolutions of the
//! incompressible Euler equations on an annulus.
//!
//! The modules follow the verification pipeline:
//!
//! - [`geometry`]: annulus, admissible parameter ranges, polar frames
//! - [`quadrature`]: Gauss rules and polar tensor-product rules
//! - [`burgers`]: rarefaction wave and its Godunov oracle
//! - [`subsolution`]: `(vbar, ubar, qbar)`, `ebar` and the generalized energy
//! - [`weakform`]: distributional residuals and energy accounting
//! - [`viscosity`]: radial heat-type reduction of Navier-Stokes
//! - [`boundary_layer`]: cutoff test fields and boundary integral scaling

pub mod boundary_layer;
pub mod burgers;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod quadrature;
pub mod subsolution;
pub mod viscosity;
pub mod weakform;

pub use error::{Error, Result};
pub use geometry::{AnnulusGeometry, SubsolutionParams};
pub use subsolution::Subsolution;
