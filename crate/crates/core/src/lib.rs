//! Regularized geodesics in the space of Kähler potentials with conical
//! singularities, for S¹-invariant potentials on the Riemann sphere.
//!
//! The crate solves the ε-regularized space-time Monge–Ampère equation with a
//! damped Newton method, runs the (ε, η, k) continuity family toward the weak
//! geodesic, and audits the a priori estimates that control the limit:
//! C⁰ barriers, weighted Laplacian bounds via the maximum principle, gradient
//! growth near the divisor and Hölder continuity across it.
//!
//! Start with the runnable programs under `examples/`.

pub mod analysis;
pub mod banded;
pub mod config;
pub mod error;
pub mod estimates;
pub mod experiment;
pub mod field;
pub mod geometry;
pub mod io;
pub mod solver;
mod stencil;
pub mod weights;

pub use error::{Error, Result};
pub use field::{PotentialGrid, Rhs};
pub use geometry::{BackgroundGeometry, DivisorData, DivisorPoint};
pub use weights::WeightSpec;
