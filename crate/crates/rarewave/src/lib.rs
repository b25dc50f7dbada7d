//! Numerical laboratory for planar rarefaction waves of the compressible
//! Navier-Stokes-Fourier system with eps-scaled dissipation.
//!
//! The crate builds the composite wave profile (smooth rarefaction plus a
//! hyperbolic correction wave), runs the viscous solver against it, and
//! measures the decay laws and the vanishing-dissipation convergence rate.
//! See the `examples/` directory for one runnable program per capability.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod gas;
pub mod harness;
pub mod hyperbolic;
pub mod profile;
pub mod rarefaction;
pub mod solver;

pub use error::{Error, Result};
