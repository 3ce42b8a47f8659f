//! Interaction virial `V_a = ∬ ρ(x) |x - y| ρ(y)` and its time derivative.
//!
//! For `i∂ₜφ = -Δφ + Uφ` the total density obeys `∂ₜρ + 2∇·J = 0` with
//! `J = Σᵢ Im(φ̄ᵢ ∇φᵢ)`, so `M_a := dV_a/dt = 4 ∫ J · (∇a ∗ ρ)`. In this
//! time scale the space-time bound reads `16π ∫∫ ρ² ≤ M_a(T) - M_a(0)`
//! for repulsive interactions.
//!
//! `a(x) = min(|x|, L/2)` uses the nearest image; `∇a` vanishes where the
//! window is flat.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::{trapezoid, RunReport};
use crate::error::Result;
use crate::field::Field2C;
use crate::spectral::{Multiplier, Spectral};

/// Prefactor of `∫∫ρ²` in the space-time bound.
pub const MORAWETZ_CONSTANT: f64 = 16.0 * PI;
/// Slack allowed for time discretization in the inequality check.
pub const INEQUALITY_SLACK: f64 = 0.05;
/// Allowed relative disagreement between the two `M_a` evaluations.
pub const TWO_WAY_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MorawetzSample {
    pub t: f64,
    pub v_a: f64,
    pub m_a: f64,
    pub rho2: f64,
}

/// Multipliers of `a` and of the three components of `∇a`.
pub struct MorawetzKernels {
    a: Multiplier,
    grad: [Multiplier; 3],
}

impl MorawetzKernels {
    pub fn new(spec: &Spectral) -> Self {
        let half = 0.5 * spec.grid().box_length();
        let r = |d: [f64; 3]| (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let a = spec.kernel_multiplier(|d| r(d).min(half));
        let comp = |axis: usize| {
            spec.kernel_multiplier(move |d| {
                let rr = r(d);
                if rr == 0.0 || rr >= half {
                    0.0
                } else {
                    d[axis] / rr
                }
            })
        };
        Self {
            a,
            grad: [comp(0), comp(1), comp(2)],
        }
    }
}

/// `(V_a, M_a, ∫ρ²)` of the total density.
pub fn morawetz_action(spec: &Spectral, k: &MorawetzKernels, f: &Field2C) -> Result<MorawetzSample> {
    let w = f.grid.cell_volume();
    let rho = f.total_density();
    let conv = spec.convolve_density(&rho, &k.a)?;
    let v_a = w * rho.iter().zip(&conv).map(|(r, c)| r * c).sum::<f64>();
    let rho2 = w * rho.iter().map(|r| r * r).sum::<f64>();
    let mut current = [vec![0.0; rho.len()], vec![0.0; rho.len()], vec![0.0; rho.len()]];
    for psi in &f.phi {
        let g = spec.gradient(psi);
        for axis in 0..3 {
            for ((j, p), d) in current[axis].iter_mut().zip(psi).zip(&g[axis]) {
                *j += (p.conj() * d).im;
            }
        }
    }
    let mut m_a = 0.0;
    for axis in 0..3 {
        let c = spec.convolve_density(&rho, &k.grad[axis])?;
        m_a += current[axis].iter().zip(&c).map(|(j, c)| j * c).sum::<f64>();
    }
    Ok(MorawetzSample {
        t: f.t,
        v_a,
        m_a: 4.0 * w * m_a,
        rho2,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MorawetzReport {
    /// `16π ∫ ∫ρ² dt`.
    pub lhs: f64,
    /// `M_a(end) - M_a(start)`.
    pub rhs: f64,
    pub pass: bool,
    /// `max |ΔV_a/Δt - M_a| / max |M_a|` over interior samples.
    pub two_way_deviation: f64,
    pub two_way_ok: bool,
    pub samples: usize,
}

/// Space-time inequality and the two-way `M_a` comparison on a run
/// recorded with Morawetz samples.
pub fn morawetz_inequality_check(samples: &[MorawetzSample]) -> MorawetzReport {
    let series: Vec<(f64, f64)> = samples.iter().map(|s| (s.t, s.rho2)).collect();
    let lhs = MORAWETZ_CONSTANT * trapezoid(&series);
    let rhs = match (samples.first(), samples.last()) {
        (Some(a), Some(b)) => b.m_a - a.m_a,
        _ => 0.0,
    };
    let pass = lhs <= rhs * (1.0 + INEQUALITY_SLACK) || (lhs == 0.0 && rhs == 0.0);
    let scale = samples.iter().fold(0.0f64, |a, s| a.max(s.m_a.abs()));
    let mut dev: f64 = 0.0;
    for w in samples.windows(3) {
        let fd = (w[2].v_a - w[0].v_a) / (w[2].t - w[0].t);
        dev = dev.max((fd - w[1].m_a).abs());
    }
    let two_way_deviation = if scale > 0.0 { dev / scale } else { dev };
    MorawetzReport {
        lhs,
        rhs,
        pass,
        two_way_deviation,
        two_way_ok: two_way_deviation <= TWO_WAY_TOL,
        samples: samples.len(),
    }
}

/// Collects the Morawetz samples of a run report.
pub fn morawetz_series(report: &RunReport) -> Vec<MorawetzSample> {
    report.samples.iter().filter_map(|s| s.morawetz).collect()
}
