//! Convergence of the modified system to the limiting one as `N` grows.
//!
//! For every `N` the Neumann profiles at `R = Nℓ` give the convolution
//! couplings of the modified system; both systems are evolved from matched
//! Gaussian data and the `H¹` distance is recorded at each sample. The
//! log-log slope of the worst-in-time distance against `N` is fitted over
//! the rows with `N >= min_fit_n`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{gaussian_pair, trapezoid, EvolveOptions, GpParams, GpSystem, Sample};
use crate::error::{Error, Result};
use crate::field::{norm, Field2C, NormKind};
use crate::grid::Grid3;
use crate::potentials::{radial_fourier, CouplingSpec, PairTag, RadialPotential, SpectralProfile};
use crate::scattering::{solve_neumann, solve_zero_energy};
use crate::spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LambdaSchedule {
    Fixed(f64),
    /// `λ = γ ln N`, clamped below at 1.
    Log { gamma: f64 },
}

impl LambdaSchedule {
    pub fn lambda(&self, n: u64) -> f64 {
        match *self {
            LambdaSchedule::Fixed(l) => l,
            LambdaSchedule::Log { gamma } => (gamma * (n as f64).ln()).max(1.0),
        }
    }
}

/// Couplings of the limiting system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitCoupling {
    /// `8π a^λ`.
    ScatteringLength,
    /// `8π b`, the hard-core limit.
    HardCore,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub grid: Grid3,
    pub dt: f64,
    pub t_final: f64,
    pub sample_every: usize,
    /// Potentials for the pairs 11, 22, 12.
    pub potentials: [RadialPotential; 3],
    pub n_list: Vec<u64>,
    pub schedule: LambdaSchedule,
    pub ell: f64,
    pub fractions: [f64; 2],
    /// Gaussian widths of the initial data.
    pub sigma: [f64; 2],
    pub limit: LimitCoupling,
    /// Replace every convolution kernel by the limiting contact coupling.
    pub force_identical: bool,
    pub min_fit_n: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub lambda: f64,
    pub epsilon: [f64; 3],
    pub a_lambda: [f64; 3],
    /// `sup_t ‖φ̃ₜ - φₜ‖_{H¹}` over samples.
    pub err_h1: f64,
    /// Space-time `L⁴` norm of the difference.
    pub err_l4: f64,
    pub truncation_suspect: bool,
    pub grid_n: usize,
    pub box_length: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoTermFit {
    /// Coefficient of `1/N`.
    pub a: f64,
    /// Coefficient of `ε(λ)`.
    pub b: f64,
    /// `max(err/model, model/err)` over fitted rows.
    pub worst_factor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub fit_rows: usize,
    pub ell: f64,
    /// `max N · err_h1` over fitted rows.
    pub const_per_ell: Option<f64>,
    /// The same constant multiplied by `ℓ`, comparable across `ℓ`.
    pub const_ell_scaled: Option<f64>,
    pub two_term: Option<TwoTermFit>,
}

struct RowSetup {
    n: u64,
    lambda: f64,
    a: [f64; 3],
    eps: [f64; 3],
    limit_c: [f64; 3],
}

fn initial_data(cfg: &SweepConfig, masses: [f64; 2]) -> Result<Field2C> {
    gaussian_pair(cfg.grid, cfg.sigma, masses)
}

fn validate(cfg: &SweepConfig) -> Result<()> {
    if cfg.n_list.is_empty() || cfg.n_list.contains(&0) {
        return Err(Error::InvalidParameter("N list must be non-empty with N >= 1".into()));
    }
    if !(cfg.ell > 0.0) {
        return Err(Error::InvalidParameter(format!("ell must be > 0, got {}", cfg.ell)));
    }
    if cfg.fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
        return Err(Error::InvalidParameter("species fractions must lie in (0, 1)".into()));
    }
    Ok(())
}

fn key(c: &[f64; 3]) -> [u64; 3] {
    c.map(f64::to_bits)
}

type Trajectory = (Vec<Field2C>, bool);

/// Runs the sweep; rows are evaluated concurrently and returned in the
/// order of `n_list`.
pub fn convergence_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    validate(cfg)?;
    let spec = Arc::new(Spectral::new(cfg.grid));
    let opts = EvolveOptions {
        t_final: cfg.t_final,
        dt: cfg.dt,
        sample_every: cfg.sample_every,
        morawetz: false,
    };

    let setups: Vec<RowSetup> = cfg
        .n_list
        .iter()
        .map(|&n| {
            let lambda = cfg.schedule.lambda(n);
            let mut a = [0.0; 3];
            let mut eps = [0.0; 3];
            let mut limit_c = [0.0; 3];
            for p in 0..3 {
                let z = solve_zero_energy(&cfg.potentials[p], lambda)?;
                a[p] = z.a_lambda;
                eps[p] = z.b - z.a_lambda;
                limit_c[p] = match cfg.limit {
                    LimitCoupling::ScatteringLength => z.a_lambda,
                    LimitCoupling::HardCore => {
                        if cfg.potentials[p].is_zero() {
                            0.0
                        } else {
                            z.b
                        }
                    }
                };
            }
            Ok(RowSetup {
                n,
                lambda,
                a,
                eps,
                limit_c,
            })
        })
        .collect::<Result<_>>()?;

    // one limiting trajectory per distinct coupling set
    let mut distinct: BTreeMap<[u64; 3], [f64; 3]> = BTreeMap::new();
    for s in &setups {
        distinct.insert(key(&s.limit_c), s.limit_c);
    }
    let limit_runs: Vec<([u64; 3], Trajectory)> = distinct
        .into_par_iter()
        .map(|(k, c)| -> Result<([u64; 3], Trajectory)> {
            let params = GpParams::limiting(c[0], c[1], c[2], cfg.fractions)?;
            let sys = GpSystem::new(spec.clone(), &params)?;
            let f0 = initial_data(cfg, cfg.fractions)?;
            let mut fields = Vec::new();
            let mut obs = |f: &Field2C, _: &Sample| -> Result<()> {
                fields.push(f.clone());
                Ok(())
            };
            let (_, rep) = sys.evolve(f0, &opts, &mut [&mut obs])?;
            Ok((k, (fields, rep.truncation_suspect)))
        })
        .collect::<Result<_>>()?;
    let limit_runs: BTreeMap<[u64; 3], Trajectory> = limit_runs.into_iter().collect();

    let rows: Vec<SweepRow> = setups
        .par_iter()
        .map(|s| run_row(cfg, &spec, &opts, s, &limit_runs[&key(&s.limit_c)]))
        .collect::<Result<_>>()?;

    Ok(summarize(cfg, rows))
}

fn run_row(
    cfg: &SweepConfig,
    spec: &Arc<Spectral>,
    opts: &EvolveOptions,
    s: &RowSetup,
    limit: &Trajectory,
) -> Result<SweepRow> {
    let mut profiles: Vec<SpectralProfile> = Vec::with_capacity(3);
    for (p, tag) in PairTag::ALL.iter().enumerate() {
        let pot = &cfg.potentials[p];
        let prof = if cfg.force_identical {
            SpectralProfile::contact(8.0 * PI * s.limit_c[p])
        } else {
            let nsol = solve_neumann(pot, s.lambda, s.n as f64 * cfg.ell)?;
            let c = CouplingSpec::new(s.lambda, s.n, *tag)?;
            radial_fourier(pot, &c, Some(Arc::new(nsol.profile_table())))?
        };
        profiles.push(prof);
    }
    let [p11, p22, p12]: [SpectralProfile; 3] = profiles.try_into().expect("three profiles");
    let masses = cfg.fractions.map(|f| (f * s.n as f64).round() / s.n as f64);
    let params = GpParams::modified(p11, p22, p12, masses);
    let sys = GpSystem::new(spec.clone(), &params)?;
    let f0 = initial_data(cfg, masses)?;

    let (limit_fields, limit_suspect) = limit;
    let mut idx = 0usize;
    let mut err_h1: f64 = 0.0;
    let mut l4_series: Vec<(f64, f64)> = Vec::new();
    let mut obs = |f: &Field2C, _: &Sample| -> Result<()> {
        let reference = limit_fields
            .get(idx)
            .ok_or_else(|| Error::GridMismatch("limiting trajectory has fewer samples".into()))?;
        let d = f.difference(reference)?;
        err_h1 = err_h1.max(norm(spec, &d, NormKind::H1)?.combined);
        let l4 = norm(spec, &d, NormKind::L4)?;
        l4_series.push((f.t, l4.species[0].powi(4) + l4.species[1].powi(4)));
        idx += 1;
        Ok(())
    };
    let (_, rep) = sys.evolve(f0, opts, &mut [&mut obs])?;
    let err_l4 = trapezoid(&l4_series).powf(0.25);
    log::info!("sweep row N = {} lambda = {}: err_h1 = {err_h1:.6e}", s.n, s.lambda);
    Ok(SweepRow {
        n: s.n,
        lambda: s.lambda,
        epsilon: s.eps,
        a_lambda: s.a,
        err_h1,
        err_l4,
        truncation_suspect: rep.truncation_suspect || *limit_suspect,
        grid_n: cfg.grid.n(),
        box_length: cfg.grid.box_length(),
        dt: cfg.dt,
    })
}

/// Least-squares line through `(x, y)`: `(slope, intercept)`.
pub fn fit_line(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Fits `err ≈ a/N + b ε` with nonnegative coefficients.
pub fn two_term_fit(data: &[(f64, f64, f64)]) -> Option<TwoTermFit> {
    if data.is_empty() {
        return None;
    }
    let single = |col: usize| -> f64 {
        let (num, den) = data.iter().fold((0.0, 0.0), |(n, d), r| {
            let x = if col == 0 { 1.0 / r.0 } else { r.1 };
            (n + x * r.2, d + x * x)
        });
        if den > 0.0 {
            (num / den).max(0.0)
        } else {
            0.0
        }
    };
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(n, e, y) in data {
        let x1 = 1.0 / n;
        s11 += x1 * x1;
        s12 += x1 * e;
        s22 += e * e;
        t1 += x1 * y;
        t2 += e * y;
    }
    let det = s11 * s22 - s12 * s12;
    let (mut a, mut b) = if det.abs() > 1e-14 * s11 * s22 {
        ((t1 * s22 - t2 * s12) / det, (s11 * t2 - s12 * t1) / det)
    } else {
        (single(0), 0.0)
    };
    if a < 0.0 || b < 0.0 {
        let (a1, b1) = (single(0), single(1));
        let res = |a: f64, b: f64| -> f64 {
            data.iter().map(|r| (a / r.0 + b * r.1 - r.2).powi(2)).sum()
        };
        if res(a1, 0.0) <= res(0.0, b1) {
            a = a1;
            b = 0.0;
        } else {
            a = 0.0;
            b = b1;
        }
    }
    let worst_factor = data
        .iter()
        .map(|r| {
            let m = a / r.0 + b * r.1;
            if m > 0.0 && r.2 > 0.0 {
                (r.2 / m).max(m / r.2)
            } else {
                f64::INFINITY
            }
        })
        .fold(1.0, f64::max);
    Some(TwoTermFit { a, b, worst_factor })
}

fn summarize(cfg: &SweepConfig, rows: Vec<SweepRow>) -> SweepResult {
    let usable: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.n >= cfg.min_fit_n && !r.truncation_suspect && r.err_h1 > 0.0)
        .collect();
    let pts: Vec<(f64, f64)> = usable
        .iter()
        .map(|r| ((r.n as f64).ln(), r.err_h1.ln()))
        .collect();
    let fit = fit_line(&pts);
    let const_per_ell = usable
        .iter()
        .map(|r| r.n as f64 * r.err_h1)
        .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.max(v))));
    let model_data: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|r| !r.truncation_suspect && r.err_h1 > 0.0)
        .map(|r| (r.n as f64, r.epsilon.iter().cloned().fold(0.0, f64::max), r.err_h1))
        .collect();
    SweepResult {
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        fit_rows: pts.len(),
        ell: cfg.ell,
        const_per_ell,
        const_ell_scaled: const_per_ell.map(|c| c * cfg.ell),
        two_term: two_term_fit(&model_data),
        rows,
    }
}
