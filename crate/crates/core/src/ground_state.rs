//! Minimizer of the trapped two-component energy
//!
//! `E[u, v] = Σᵢ 𝔫ᵢ ∫ |∇uᵢ|² + W|uᵢ|² + 4π𝔞₁𝔫₁²∫|u|⁴ + 4π𝔞₂𝔫₂²∫|v|⁴
//!            + 8π𝔞₁₂𝔫₁𝔫₂ ∫|u|²|v|²`
//!
//! over `‖u‖ = ‖v‖ = 1`, by a projected gradient flow with step control.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::spectral::Spectral;

#[derive(Debug, Clone)]
pub struct GroundStateProblem {
    pub trap: Vec<f64>,
    /// `(𝔞₁, 𝔞₂, 𝔞₁₂)`.
    pub a: [f64; 3],
    /// `(𝔫₁, 𝔫₂)`, summing to 1.
    pub n: [f64; 2],
    /// Stop once an accepted step lowers the energy by less than this.
    pub tol: f64,
    pub max_iters: usize,
}

impl GroundStateProblem {
    pub fn new(trap: Vec<f64>, a: [f64; 3], n1: f64) -> Result<Self> {
        if !(n1 > 0.0 && n1 < 1.0) {
            return Err(Error::InvalidParameter(format!("species fraction must lie in (0, 1), got {n1}")));
        }
        if !(a[0] >= 0.0 && a[1] >= 0.0) || !a[2].is_finite() {
            return Err(Error::InvalidParameter(format!(
                "intra-species scattering lengths must be >= 0, got {} and {}",
                a[0], a[1]
            )));
        }
        if trap.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("trap must be finite".into()));
        }
        Ok(Self {
            trap,
            a,
            n: [n1, 1.0 - n1],
            tol: 1e-13,
            max_iters: 200_000,
        })
    }
}

/// `ω² |x|²` sampled on the grid.
pub fn harmonic_trap(grid: &Grid3, omega: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            let x = grid.position(i);
            omega * omega * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
        })
        .collect()
}

/// Unit-norm Gaussian `exp(-|x|²/(2s²))`.
pub fn gaussian_guess(grid: &Grid3, s: f64) -> Vec<Complex64> {
    let mut u: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let x = grid.position(i);
            Complex64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * s * s)).exp(), 0.0)
        })
        .collect();
    normalize(&mut u, grid.cell_volume());
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MiscibilityLabel {
    Miscible,
    Boundary,
    Immiscible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Miscibility {
    pub label: MiscibilityLabel,
    /// `𝔞₁𝔞₂ - 𝔞₁₂²`.
    pub margin: f64,
}

impl Miscibility {
    pub fn is_miscible(&self) -> bool {
        self.label != MiscibilityLabel::Immiscible
    }
}

pub fn miscibility_check(a1: f64, a2: f64, a12: f64) -> Result<Miscibility> {
    if !(a1 >= 0.0 && a2 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "scattering lengths must be >= 0, got {a1}, {a2}"
        )));
    }
    let margin = a1 * a2 - a12 * a12;
    let label = if margin > 0.0 {
        MiscibilityLabel::Miscible
    } else if margin == 0.0 {
        MiscibilityLabel::Boundary
    } else {
        MiscibilityLabel::Immiscible
    };
    Ok(Miscibility { label, margin })
}

fn l2_sq(u: &[Complex64], w: f64) -> f64 {
    u.iter().map(|v| v.norm_sqr()).sum::<f64>() * w
}

fn normalize(u: &mut [Complex64], w: f64) {
    let s = 1.0 / l2_sq(u, w).sqrt();
    u.iter_mut().for_each(|v| *v *= s);
}

fn check_problem(spec: &Spectral, prob: &GroundStateProblem) -> Result<()> {
    if prob.trap.len() != spec.grid().len() {
        return Err(Error::GridMismatch("trap does not match grid".into()));
    }
    Ok(())
}

fn energy_unchecked(spec: &Spectral, u: &[Complex64], v: &[Complex64], prob: &GroundStateProblem) -> f64 {
    let w = spec.grid().cell_volume();
    let [n1, n2] = prob.n;
    let [a1, a2, a12] = prob.a;
    let mut pot = 0.0;
    for ((pu, pv), t) in u.iter().zip(v).zip(&prob.trap) {
        let (ru, rv) = (pu.norm_sqr(), pv.norm_sqr());
        pot += t * (n1 * ru + n2 * rv)
            + 4.0 * PI * a1 * n1 * n1 * ru * ru
            + 4.0 * PI * a2 * n2 * n2 * rv * rv
            + 8.0 * PI * a12 * n1 * n2 * ru * rv;
    }
    n1 * spec.kinetic_integral(u) + n2 * spec.kinetic_integral(v) + pot * w
}

/// The energy functional; both inputs must have unit norm to 1e-8.
pub fn gp_energy(spec: &Spectral, u: &[Complex64], v: &[Complex64], prob: &GroundStateProblem) -> Result<f64> {
    check_problem(spec, prob)?;
    let w = spec.grid().cell_volume();
    for x in [u, v] {
        if x.len() != spec.grid().len() {
            return Err(Error::GridMismatch("state does not match grid".into()));
        }
        let dev = (l2_sq(x, w).sqrt() - 1.0).abs();
        if dev > 1e-8 {
            return Err(Error::NotNormalized { deviation: dev });
        }
    }
    Ok(energy_unchecked(spec, u, v, prob))
}

/// Per-unit-mass gradients `(g_u, g_v)` of the energy.
fn gradients(spec: &Spectral, u: &[Complex64], v: &[Complex64], prob: &GroundStateProblem) -> [Vec<Complex64>; 2] {
    let [n1, n2] = prob.n;
    let [a1, a2, a12] = prob.a;
    let lu = spec.neg_laplacian(u);
    let lv = spec.neg_laplacian(v);
    let mut gu = Vec::with_capacity(u.len());
    let mut gv = Vec::with_capacity(v.len());
    for i in 0..u.len() {
        let (ru, rv) = (u[i].norm_sqr(), v[i].norm_sqr());
        let t = prob.trap[i];
        gu.push(lu[i] + u[i] * (t + 8.0 * PI * a1 * n1 * ru + 8.0 * PI * a12 * n2 * rv));
        gv.push(lv[i] + v[i] * (t + 8.0 * PI * a2 * n2 * rv + 8.0 * PI * a12 * n1 * ru));
    }
    [gu, gv]
}

fn inner(a: &[Complex64], b: &[Complex64], w: f64) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * w
}

/// `‖g - μ x‖` with `μ = ⟨x, g⟩`, per species, and the multipliers `μ`.
pub fn euler_lagrange_residual(
    spec: &Spectral,
    u: &[Complex64],
    v: &[Complex64],
    prob: &GroundStateProblem,
) -> ([f64; 2], [f64; 2]) {
    let w = spec.grid().cell_volume();
    let g = gradients(spec, u, v, prob);
    let mut res = [0.0; 2];
    let mut mu = [0.0; 2];
    for (s, x) in [u, v].iter().enumerate() {
        let m = inner(x, &g[s], w).re;
        mu[s] = m;
        let r: f64 = g[s].iter().zip(x.iter()).map(|(gi, xi)| (gi - xi * m).norm_sqr()).sum();
        res[s] = (r * w).sqrt();
    }
    (res, mu)
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundState {
    #[serde(skip)]
    pub u: Vec<Complex64>,
    #[serde(skip)]
    pub v: Vec<Complex64>,
    pub e_gp: f64,
    pub iterations: usize,
    /// Energies after each accepted step, starting with the initial value.
    pub energies: Vec<f64>,
    pub residual: [f64; 2],
    pub mu: [f64; 2],
    pub miscibility: Miscibility,
    pub warnings: Vec<String>,
}

const TAU0: f64 = 1e-2;
const TAU_MAX: f64 = 0.1;
const TAU_MIN: f64 = 1e-14;

fn fix_phase(u: &mut [Complex64]) {
    let s: Complex64 = u.iter().sum();
    if s.norm() > 0.0 {
        let ph = s.conj() / s.norm();
        u.iter_mut().for_each(|v| *v *= ph);
    }
}

/// Projected gradient flow from a normalized initial guess.
pub fn minimize(
    spec: &Spectral,
    prob: &GroundStateProblem,
    init_u: Vec<Complex64>,
    init_v: Vec<Complex64>,
) -> Result<GroundState> {
    let w = spec.grid().cell_volume();
    let mut e = gp_energy(spec, &init_u, &init_v, prob)?;
    let miscibility = miscibility_check(prob.a[0], prob.a[1], prob.a[2])?;
    let mut warnings = Vec::new();
    if !miscibility.is_miscible() {
        let msg = format!(
            "couplings violate the miscibility condition (margin {:.6e}); the minimizer may not be unique",
            miscibility.margin
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let (mut u, mut v) = (init_u, init_v);
    let mut energies = vec![e];
    let mut tau = TAU0;
    let mut streak = 0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < prob.max_iters {
        iterations += 1;
        let [gu, gv] = gradients(spec, &u, &v, prob);
        let mut nu: Vec<Complex64> = u.iter().zip(&gu).map(|(x, g)| x - g * tau).collect();
        let mut nv: Vec<Complex64> = v.iter().zip(&gv).map(|(x, g)| x - g * tau).collect();
        normalize(&mut nu, w);
        normalize(&mut nv, w);
        let ne = energy_unchecked(spec, &nu, &nv, prob);
        if !ne.is_finite() || ne > e {
            tau *= 0.5;
            streak = 0;
            if tau < TAU_MIN {
                // no representable descent step is left
                converged = true;
                break;
            }
            continue;
        }
        let decrease = e - ne;
        u = nu;
        v = nv;
        e = ne;
        energies.push(e);
        streak += 1;
        if streak >= 5 {
            tau = (2.0 * tau).min(TAU_MAX);
            streak = 0;
        }
        if decrease < prob.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MaxIterations {
            iterations,
            best_energy: e,
            best: Box::new((u, v)),
        });
    }
    fix_phase(&mut u);
    fix_phase(&mut v);
    let (residual, mu) = euler_lagrange_residual(spec, &u, &v, prob);
    Ok(GroundState {
        u,
        v,
        e_gp: e,
        iterations,
        energies,
        residual,
        mu,
        miscibility,
        warnings,
    })
}
