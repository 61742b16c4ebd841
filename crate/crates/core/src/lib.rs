//! Desk-scale pseudo-spectral laboratory for 2D incompressible flow on the
//! periodic torus: Navier-Stokes and the corrected Smagorinsky model, plus
//! the diagnostics and inequality monitors used to check regularity, error,
//! and convergence bounds numerically.

pub mod error;
pub mod field;
pub mod flow;
pub mod grid;
pub mod integrate;
pub mod monitors;
pub mod velocity;

pub use error::{CoreError, Result};
pub use field::SpectralField;
pub use grid::{WavenumberGrid, DIVERGENCE_TOL, HERMITIAN_TOL};
pub use velocity::VelocityField;
