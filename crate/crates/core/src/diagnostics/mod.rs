//! Morawetz and dispersive diagnostics, and the `(N, λ)` convergence sweep.

pub mod dispersive;
pub mod morawetz;
pub mod sweep;
