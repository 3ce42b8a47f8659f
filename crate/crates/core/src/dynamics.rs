//! Strang split-step propagation of the limiting (cubic) and modified
//! (convolution) two-component systems
//!
//! `i ∂ₜ φᵢ = -Δ φᵢ + Uᵢ φᵢ`, with `Uᵢ = Σⱼ 8π cᵢⱼ |φⱼ|²` or
//! `Uᵢ = Σⱼ Ûᵢⱼ ∗ |φⱼ|²`, plus an optional external potential.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::diagnostics::morawetz::{morawetz_action, MorawetzKernels, MorawetzSample};
use crate::error::{Error, Result};
use crate::field::{norm, Field2C, NormKind};
use crate::potentials::{PairTag, SpectralProfile};
use crate::spectral::{Multiplier, Spectral};

/// Density ratio in the outer index shell above which a run is flagged.
pub const BOUNDARY_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone)]
pub enum Couplings {
    /// Scattering lengths `cᵢⱼ` entering as `8π cᵢⱼ`.
    Limiting { c: [[f64; 2]; 2] },
    /// Transforms `Û₁₁, Û₂₂, Û₁₂` of the convolution kernels.
    Modified { profiles: [SpectralProfile; 3] },
}

#[derive(Debug, Clone)]
pub struct GpParams {
    pub couplings: Couplings,
    pub trap: Option<Vec<f64>>,
    /// Target masses of the initial data.
    pub masses: [f64; 2],
}

impl GpParams {
    pub fn limiting(c1: f64, c2: f64, c12: f64, masses: [f64; 2]) -> Result<Self> {
        if !(c1 >= 0.0 && c2 >= 0.0) || !c12.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "intra-species couplings must be >= 0 (got {c1}, {c2}) and c12 finite"
            )));
        }
        Ok(Self {
            couplings: Couplings::Limiting {
                c: [[c1, c12], [c12, c2]],
            },
            trap: None,
            masses,
        })
    }

    pub fn modified(p11: SpectralProfile, p22: SpectralProfile, p12: SpectralProfile, masses: [f64; 2]) -> Self {
        Self {
            couplings: Couplings::Modified {
                profiles: [p11, p22, p12],
            },
            trap: None,
            masses,
        }
    }

    pub fn with_trap(mut self, trap: Vec<f64>) -> Self {
        self.trap = Some(trap);
        self
    }

    /// `c₁c₂ - c₁₂²` for cubic couplings.
    pub fn miscibility_margin(&self) -> Option<f64> {
        match &self.couplings {
            Couplings::Limiting { c } => Some(c[0][0] * c[1][1] - c[0][1] * c[0][1]),
            Couplings::Modified { .. } => None,
        }
    }
}

enum Prepared {
    Limiting([[f64; 2]; 2]),
    Modified(Box<[Multiplier; 3]>),
}

/// A parameter set bound to an FFT context, ready to step.
pub struct GpSystem {
    spec: Arc<Spectral>,
    kind: Prepared,
    trap: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub t_final: f64,
    pub dt: f64,
    /// Steps between recorded samples.
    pub sample_every: usize,
    pub morawetz: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub t: f64,
    pub mass: [f64; 2],
    pub energy: f64,
    /// Combined `L∞` norm.
    pub linf: f64,
    /// Per-species `L⁴` norms.
    pub l4: [f64; 2],
    /// Combined `L⁴` norm.
    pub l4x: f64,
    /// Combined `W^{1,∞}` norm.
    pub w1inf: f64,
    pub boundary_density: f64,
    pub morawetz: Option<MorawetzSample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub samples: Vec<Sample>,
    pub steps: usize,
    pub dt: f64,
    pub truncation_suspect: bool,
}

impl RunReport {
    /// `(∫ Σᵢ ‖φᵢ‖⁴_{L⁴} dt)^{1/4}` by the trapezoid rule over samples.
    pub fn spacetime_l4(&self) -> f64 {
        let vals: Vec<(f64, f64)> = self
            .samples
            .iter()
            .map(|s| (s.t, s.l4[0].powi(4) + s.l4[1].powi(4)))
            .collect();
        trapezoid(&vals).powf(0.25)
    }
}

pub(crate) fn trapezoid(v: &[(f64, f64)]) -> f64 {
    v.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

/// Called on the stepping thread at every sample.
pub trait Observer {
    fn observe(&mut self, field: &Field2C, sample: &Sample) -> Result<()>;
}

impl<F: FnMut(&Field2C, &Sample) -> Result<()>> Observer for F {
    fn observe(&mut self, field: &Field2C, sample: &Sample) -> Result<()> {
        self(field, sample)
    }
}

fn rotate(psi: &mut [Complex64], u: &[f64], dt: f64) {
    for (p, &v) in psi.iter_mut().zip(u) {
        *p *= Complex64::from_polar(1.0, -v * dt);
    }
}

impl GpSystem {
    pub fn new(spec: Arc<Spectral>, params: &GpParams) -> Result<Self> {
        let kind = match &params.couplings {
            Couplings::Limiting { c } => Prepared::Limiting(*c),
            Couplings::Modified { profiles } => {
                let m = [
                    spec.sample_profile(&profiles[0])?,
                    spec.sample_profile(&profiles[1])?,
                    spec.sample_profile(&profiles[2])?,
                ];
                Prepared::Modified(Box::new(m))
            }
        };
        if let Some(w) = &params.trap {
            if w.len() != spec.grid().len() {
                return Err(Error::GridMismatch("trap array does not match grid".into()));
            }
        }
        Ok(Self {
            spec,
            kind,
            trap: params.trap.clone(),
        })
    }

    pub fn spectral(&self) -> &Arc<Spectral> {
        &self.spec
    }

    fn check_grid(&self, f: &Field2C) -> Result<()> {
        if f.grid != *self.spec.grid() {
            return Err(Error::GridMismatch("field grid differs from system grid".into()));
        }
        Ok(())
    }

    /// Interaction potentials without the trap.
    fn interaction(&self, f: &Field2C) -> Result<[Vec<f64>; 2]> {
        let rho = [f.density(0), f.density(1)];
        match &self.kind {
            Prepared::Limiting(c) => {
                let u = |i: usize| -> Vec<f64> {
                    rho[0]
                        .iter()
                        .zip(&rho[1])
                        .map(|(r1, r2)| 8.0 * PI * (c[i][0] * r1 + c[i][1] * r2))
                        .collect()
                };
                Ok([u(0), u(1)])
            }
            Prepared::Modified(m) => {
                let mut out = [Vec::new(), Vec::new()];
                for (i, slot) in out.iter_mut().enumerate() {
                    let a = self.spec.convolve_density(&rho[0], &m[PairTag::of(i, 0).index()])?;
                    let b = self.spec.convolve_density(&rho[1], &m[PairTag::of(i, 1).index()])?;
                    *slot = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                }
                Ok(out)
            }
        }
    }

    /// `(U₁, U₂)` including the trap.
    pub fn nonlinear_potential(&self, f: &Field2C) -> Result<[Vec<f64>; 2]> {
        self.check_grid(f)?;
        let mut u = self.interaction(f)?;
        if let Some(w) = &self.trap {
            for ui in &mut u {
                ui.iter_mut().zip(w).for_each(|(a, b)| *a += b);
            }
        }
        Ok(u)
    }

    /// `Σ∫|∇φᵢ|² + ½ Σᵢ ∫ (interaction)ᵢ ρᵢ + ∫ W ρ`.
    pub fn energy(&self, f: &Field2C) -> Result<f64> {
        self.check_grid(f)?;
        let u = self.interaction(f)?;
        let w = f.grid.cell_volume();
        let mut e = 0.0;
        for i in 0..2 {
            e += self.spec.kinetic_integral(&f.phi[i]);
            let rho = f.density(i);
            e += 0.5 * w * rho.iter().zip(&u[i]).map(|(r, v)| r * v).sum::<f64>();
            if let Some(trap) = &self.trap {
                e += w * rho.iter().zip(trap).map(|(r, v)| r * v).sum::<f64>();
            }
        }
        Ok(e)
    }

    /// Time derivative `-i(-Δφᵢ + Uᵢ φᵢ)`.
    pub fn rhs(&self, f: &Field2C) -> Result<Field2C> {
        let u = self.nonlinear_potential(f)?;
        let mut out = Field2C::zeros(f.grid);
        out.t = f.t;
        for i in 0..2 {
            let lap = self.spec.neg_laplacian(&f.phi[i]);
            out.phi[i] = lap
                .iter()
                .zip(&f.phi[i])
                .zip(&u[i])
                .map(|((l, p), v)| Complex64::new(0.0, -1.0) * (l + p * v))
                .collect();
        }
        Ok(out)
    }

    /// One step: half free flight, exact phase rotation, half free flight.
    pub fn step_strang(&self, f: &mut Field2C, dt: f64, step_index: usize) -> Result<()> {
        self.check_grid(f)?;
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be > 0, got {dt}")));
        }
        let half = self.spec.kinetic_phase(0.5 * dt);
        for psi in &mut f.phi {
            self.spec.apply_modes(psi, &half);
        }
        let u = self.nonlinear_potential(f)?;
        for (psi, ui) in f.phi.iter_mut().zip(&u) {
            rotate(psi, ui, dt);
        }
        for psi in &mut f.phi {
            self.spec.apply_modes(psi, &half);
        }
        f.t += dt;
        f.check_finite().map_err(|_| Error::NonFiniteStep { step: step_index })
    }

    pub fn sample(&self, f: &Field2C, morawetz: Option<&MorawetzKernels>) -> Result<Sample> {
        let linf = norm(&self.spec, f, NormKind::Linf)?;
        let l4 = norm(&self.spec, f, NormKind::L4)?;
        let w1 = norm(&self.spec, f, NormKind::W1Inf)?;
        Ok(Sample {
            t: f.t,
            mass: f.masses(),
            energy: self.energy(f)?,
            linf: linf.combined,
            l4: l4.species,
            l4x: l4.combined,
            w1inf: w1.combined,
            boundary_density: f.boundary_ratio(),
            morawetz: match morawetz {
                Some(k) => Some(morawetz_action(&self.spec, k, f)?),
                None => None,
            },
        })
    }

    /// Fixed-step evolution to `t_final`. Adjacent half kicks between
    /// samples are fused into one full kick.
    pub fn evolve(
        &self,
        f0: Field2C,
        opts: &EvolveOptions,
        observers: &mut [&mut dyn Observer],
    ) -> Result<(Field2C, RunReport)> {
        self.check_grid(&f0)?;
        f0.check_finite()?;
        if !(opts.dt > 0.0) || !(opts.t_final >= 0.0) || opts.sample_every == 0 {
            return Err(Error::InvalidParameter(format!(
                "need dt > 0, T >= 0 and a positive sample cadence (dt = {}, T = {}, every = {})",
                opts.dt, opts.t_final, opts.sample_every
            )));
        }
        let steps_f = opts.t_final / opts.dt;
        let steps = steps_f.round() as usize;
        if (steps_f - steps as f64).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "T = {} is not a whole number of steps dt = {}",
                opts.t_final, opts.dt
            )));
        }
        let kernels = opts.morawetz.then(|| MorawetzKernels::new(&self.spec));
        let t0 = f0.t;
        let mut f = f0;
        let mut samples = Vec::new();
        let record = |f: &Field2C, samples: &mut Vec<Sample>, obs: &mut [&mut dyn Observer]| -> Result<()> {
            let s = self.sample(f, kernels.as_ref())?;
            for o in obs.iter_mut() {
                o.observe(f, &s)?;
            }
            samples.push(s);
            Ok(())
        };
        record(&f, &mut samples, observers)?;
        let half = self.spec.kinetic_phase(0.5 * opts.dt);
        let full = self.spec.kinetic_phase(opts.dt);
        let mut k = 0;
        while k < steps {
            let seg = opts.sample_every.min(steps - k);
            for psi in &mut f.phi {
                self.spec.apply_modes(psi, &half);
            }
            for j in 0..seg {
                let u = self.nonlinear_potential(&f)?;
                for (psi, ui) in f.phi.iter_mut().zip(&u) {
                    rotate(psi, ui, opts.dt);
                }
                let phase = if j + 1 == seg { &half } else { &full };
                for psi in &mut f.phi {
                    self.spec.apply_modes(psi, phase);
                }
                f.check_finite()
                    .map_err(|_| Error::NonFiniteStep { step: k + j + 1 })?;
            }
            k += seg;
            f.t = t0 + k as f64 * opts.dt;
            record(&f, &mut samples, observers)?;
        }
        let truncation_suspect = samples.iter().any(|s| s.boundary_density > BOUNDARY_THRESHOLD);
        if truncation_suspect {
            log::warn!("density reached the box boundary; run flagged truncation_suspect");
        }
        Ok((
            f,
            RunReport {
                samples,
                steps,
                dt: opts.dt,
                truncation_suspect,
            },
        ))
    }
}

/// Normalized Gaussian `exp(-|x - c|²/(2σ²))` scaled to `mass`, with an
/// optional plane-wave phase `e^{i k·x}`.
pub fn gaussian(grid: crate::grid::Grid3, sigma: f64, center: [f64; 3], k: [f64; 3], mass: f64) -> Vec<Complex64> {
    let norm = (mass / (PI * sigma * sigma).powf(1.5)).sqrt();
    (0..grid.len())
        .map(|i| {
            let x = grid.position(i);
            let r2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
            let ph: f64 = (0..3).map(|a| k[a] * x[a]).sum();
            Complex64::from_polar(norm * (-r2 / (2.0 * sigma * sigma)).exp(), ph)
        })
        .collect()
}

/// Centred Gaussians of widths `sigma`, renormalized on the grid to `masses`.
pub fn gaussian_pair(grid: crate::grid::Grid3, sigma: [f64; 2], masses: [f64; 2]) -> Result<Field2C> {
    let a = gaussian(grid, sigma[0], [0.0; 3], [0.0; 3], masses[0]);
    let b = gaussian(grid, sigma[1], [0.0; 3], [0.0; 3], masses[1]);
    let mut f = Field2C::from_arrays(grid, a, b, 0.0)?;
    f.normalize_to(masses)?;
    Ok(f)
}
