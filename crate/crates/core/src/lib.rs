//! Numerical toolkit for two-component Gross–Pitaevskii systems.
//!
//! The crate covers the radial scattering problems that fix the effective
//! couplings, a periodic spectral substrate with split-step propagators for
//! the limiting (cubic) and modified (convolution) systems, the trapped
//! ground-state minimizer, pair-excitation kernels with their hyperbolic
//! series, and Morawetz and dispersive diagnostics.

pub mod bogoliubov;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
pub mod ground_state;
pub mod interp;
pub mod io;
pub mod potentials;
pub mod quadrature;
pub mod scattering;
pub mod spectral;

pub use error::{Error, Result};
