//! Pseudo-spectral simulation and numerical analysis of the dimensionless
//! thin-film equation
//!
//! ```text
//! dv/dt = -lap^2 v - lap( G(v) lap v - G'(v) ),   G(v) = -c1/(1+v) + c2/(1+v)^2
//! ```
//!
//! on the periodic box `[-pi, pi]^N`, `N = 1, 2`, for zero-mean perturbations
//! `v` of a flat film.
//!
//! * [`spectral`]: Fourier fields, transforms, Wiener and Sobolev norms.
//! * [`model`]: the wetting potential, its truncations, and three
//!   independent right-hand-side evaluators.
//! * [`analysis`]: nondimensionalization, parameter conditions, the
//!   smallness constants, dispersion and decay envelope.
//! * [`integrator`]: adaptive exponential time differencing with norm
//!   monitors.
//! * [`verify`]: randomized inequality and cross-evaluator checks.
//! * [`io`]: binary field snapshots and CSV norm series.

pub mod analysis;
pub mod error;
pub mod integrator;
pub mod io;
pub mod model;
pub mod spectral;
pub mod verify;

pub use error::{FilmError, Result};

pub use spectral::{forward_transform, inverse_transform, Grid, NormVector, SpectralField};
