//! Pair-excitation kernel of a two-component state and its hyperbolic
//! functions.
//!
//! `k_ij(x, y) = -N w_ij(N|x - y|) φ_i(x) φ_j(y)` with `w = 1 - f` from the
//! Neumann problem of each pair. The matrix kernel is sampled on a coarse
//! `m³` grid and stored as one `2m³ × 2m³` array with blocks
//! `[[k11, k12], [k21, k22]]`. Operators act through the weighted matrix
//! `w_q k` (`w_q = (L/m)³`), so composition is a plain matrix product and
//! the Frobenius norm is the Hilbert–Schmidt norm.

use std::sync::Arc;

use ndarray::{s, Array2, ArrayView2};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field2C;
use crate::potentials::{radial_fourier, CouplingSpec, PairTag, RadialPotential};
use crate::scattering::NeumannSolution;
use crate::spectral::Spectral;

/// Upper limit on the number of coarse points `m³`.
pub const MAX_COARSE_POINTS: usize = 1728;
/// Separation used on the diagonal `x = y`, in units of the cell width.
pub const DIAGONAL_OFFSET: f64 = 0.56;
/// Series terms are added until one falls below this.
pub const SERIES_TOL: f64 = 1e-12;
pub const MAX_SERIES_TERMS: usize = 40;

/// Species pair of block `(i, j)`.
fn pair_of(i: usize, j: usize) -> usize {
    PairTag::of(i, j).index()
}

/// Nearest-image distance between coarse indices along one axis, in cells.
fn image_cells(a: usize, b: usize, m: usize) -> f64 {
    let d = (a + m - b) % m;
    d.min(m - d) as f64
}

#[derive(Debug, Clone)]
pub struct KernelBlock {
    m: usize,
    box_length: f64,
    n_scale: f64,
    /// Raw kernel values, blocks `[[k11, k12], [k21, k22]]`.
    k: Array2<Complex64>,
    /// Coarse samples of `φ₁, φ₂`.
    phi: [Vec<Complex64>; 2],
    pub t: f64,
    /// `(a^λ, R)` of the Neumann solutions for pairs 11, 22, 12.
    pub sources: [(f64, f64); 3],
}

impl KernelBlock {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn points(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn n_scale(&self) -> f64 {
        self.n_scale
    }

    pub fn cell(&self) -> f64 {
        self.box_length / self.m as f64
    }

    /// Quadrature weight `(L/m)³`.
    pub fn weight(&self) -> f64 {
        self.cell().powi(3)
    }

    pub fn coarse_field(&self, species: usize) -> &[Complex64] {
        &self.phi[species]
    }

    pub fn raw(&self) -> &Array2<Complex64> {
        &self.k
    }

    /// Block `k_ij` (species `0` or `1`).
    pub fn block(&self, i: usize, j: usize) -> ArrayView2<'_, Complex64> {
        let p = self.points();
        self.k.slice(s![i * p..(i + 1) * p, j * p..(j + 1) * p])
    }

    /// Operator matrix `w_q k`.
    pub fn weighted(&self) -> Array2<Complex64> {
        self.k.mapv(|v| v * self.weight())
    }

    /// Largest `|k12(x, y) - k21(y, x)|`.
    pub fn cross_symmetry_defect(&self) -> f64 {
        let a = self.block(0, 1);
        let b = self.block(1, 0);
        a.indexed_iter()
            .map(|((x, y), v)| (v - b[[y, x]]).norm())
            .fold(0.0, f64::max)
    }

    /// Nearest-image distance between two coarse points.
    pub fn distance(&self, x: usize, y: usize) -> f64 {
        let m = self.m;
        let (ax, ay, az) = (x / (m * m), (x / m) % m, x % m);
        let (bx, by, bz) = (y / (m * m), (y / m) % m, y % m);
        let d = [image_cells(ax, bx, m), image_cells(ay, by, m), image_cells(az, bz, m)];
        self.cell() * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

/// In-place 3D DFT of an `m³` array (inverse normalized by `1/m³`).
fn fft3_small(data: &mut [Complex64], m: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    let mut line = vec![Complex64::default(); m];
    for stride in [1, m, m * m] {
        for base in 0..m * m * m {
            // lines start where the index along this axis is zero
            if (base / stride) % m != 0 {
                continue;
            }
            for (i, v) in line.iter_mut().enumerate() {
                *v = data[base + i * stride];
            }
            fft.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                data[base + i * stride] = *v;
            }
        }
    }
    if inverse {
        let s = 1.0 / (m * m * m) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

/// Restriction of a grid function to the coarse `m³` grid by truncating its
/// spectrum (the coarse Nyquist modes are dropped).
pub fn downsample(spec: &Spectral, psi: &[Complex64], m: usize) -> Result<Vec<Complex64>> {
    let n = spec.grid().n();
    if m == n {
        return Ok(psi.to_vec());
    }
    if m > n || m < 2 || m % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "coarse size must be even and at most the grid size {n}, got {m}"
        )));
    }
    let mut hat = psi.to_vec();
    spec.forward(&mut hat);
    let scale = (m * m * m) as f64 / (n * n * n) as f64;
    let half = (m / 2) as i64;
    let freq = |i: usize| {
        let i = i as i64;
        if i < half {
            i
        } else {
            i - m as i64
        }
    };
    let fine = |f: i64| f.rem_euclid(n as i64) as usize;
    let mut coarse = vec![Complex64::default(); m * m * m];
    for (idx, c) in coarse.iter_mut().enumerate() {
        let p = [freq(idx / (m * m)), freq((idx / m) % m), freq(idx % m)];
        if p.iter().any(|f| *f == -half) {
            continue;
        }
        *c = hat[(fine(p[0]) * n + fine(p[1])) * n + fine(p[2])] * scale;
    }
    fft3_small(&mut coarse, m, true);
    Ok(coarse)
}

fn check_coarse(m: usize) -> Result<()> {
    if m.pow(3) > MAX_COARSE_POINTS {
        return Err(Error::CoarseGridTooLarge {
            m,
            limit: MAX_COARSE_POINTS,
        });
    }
    Ok(())
}

/// Samples the matrix kernel on the coarse grid. `nsol` holds the Neumann
/// solutions of pairs 11, 22, 12 on balls of radius `Nℓ`.
pub fn build_kernels(
    spec: &Spectral,
    f: &Field2C,
    nsol: [&NeumannSolution; 3],
    n_scale: u64,
    m: usize,
) -> Result<KernelBlock> {
    check_coarse(m)?;
    if f.grid != *spec.grid() {
        return Err(Error::GridMismatch("field does not match spectral grid".into()));
    }
    f.check_finite()?;
    let phi = [downsample(spec, &f.phi[0], m)?, downsample(spec, &f.phi[1], m)?];
    let nf = n_scale as f64;
    let p = m * m * m;
    let mut kb = KernelBlock {
        m,
        box_length: spec.grid().box_length(),
        n_scale: nf,
        k: Array2::zeros((2 * p, 2 * p)),
        phi,
        t: f.t,
        sources: [
            (nsol[0].a_lambda, nsol[0].r_ball),
            (nsol[1].a_lambda, nsol[1].r_ball),
            (nsol[2].a_lambda, nsol[2].r_ball),
        ],
    };
    let diag = DIAGONAL_OFFSET * kb.cell();
    let rows: Vec<Vec<Complex64>> = (0..2 * p)
        .into_par_iter()
        .map(|row| {
            let (i, x) = (row / p, row % p);
            (0..2 * p)
                .map(|col| {
                    let (j, y) = (col / p, col % p);
                    let d = if x == y { diag } else { kb.distance(x, y) };
                    let w = nsol[pair_of(i, j)].w(nf * d);
                    (kb.phi[i][x] * kb.phi[j][y]) * (-nf * w)
                })
                .collect()
        })
        .collect();
    for (r, vals) in rows.into_iter().enumerate() {
        for (c, v) in vals.into_iter().enumerate() {
            kb.k[[r, c]] = v;
        }
    }
    if kb.k.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pair-excitation kernel".into()));
    }
    Ok(kb)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HsNorms {
    /// Blocks 11, 22, 12, 21.
    pub blocks: [f64; 4],
    pub total: f64,
}

/// Hilbert–Schmidt norms on the full grid, `‖k_ij‖² = ∬ N²w²(N|x-y|) ρ_i(x)
/// ρ_j(y)`, as a convolution of `ρ_j` with the squared profile. The origin
/// uses the same cell-average separation as [`build_kernels`].
pub fn hs_norm_fft(spec: &Spectral, f: &Field2C, nsol: [&NeumannSolution; 3], n_scale: u64) -> Result<HsNorms> {
    let nf = n_scale as f64;
    let h = spec.grid().h();
    let w = spec.grid().cell_volume();
    let rho = [f.density(0), f.density(1)];
    let mut sq = [0.0; 3];
    for (pair, (i, j)) in [(0, 0), (1, 1), (0, 1)].into_iter().enumerate() {
        let sol = nsol[pair];
        let mult = spec.kernel_multiplier(|d| {
            let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let r = if r == 0.0 { DIAGONAL_OFFSET * h } else { r };
            (nf * sol.w(nf * r)).powi(2)
        });
        let conv = spec.convolve_density(&rho[j], &mult)?;
        sq[pair] = (w * rho[i].iter().zip(&conv).map(|(a, b)| a * b).sum::<f64>()).max(0.0);
    }
    let blocks = [sq[0].sqrt(), sq[1].sqrt(), sq[2].sqrt(), sq[2].sqrt()];
    Ok(HsNorms {
        blocks,
        total: (sq[0] + sq[1] + 2.0 * sq[2]).sqrt(),
    })
}

/// Frobenius norms of the weighted blocks of a coarse kernel.
pub fn hs_norm_coarse(kb: &KernelBlock) -> HsNorms {
    let w = kb.weight();
    let fro = |i, j| kb.block(i, j).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() * w;
    let blocks = [fro(0, 0), fro(1, 1), fro(0, 1), fro(1, 0)];
    let total = blocks.iter().map(|b| b * b).sum::<f64>().sqrt();
    HsNorms { blocks, total }
}

pub fn frobenius(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone)]
pub struct BogoliubovPair {
    pub ch: Array2<Complex64>,
    pub sh: Array2<Complex64>,
    /// `ch - 1`.
    pub p: Array2<Complex64>,
    /// `sh - k`.
    pub r: Array2<Complex64>,
    /// Highest power of `k k̄` kept.
    pub n_max: usize,
    /// Bound on `‖(k k̄)^{n_max+1}‖ / (2 n_max + 2)!`.
    pub tail: f64,
}

fn eye(dim: usize) -> Array2<Complex64> {
    Array2::from_diag_elem(dim, Complex64::new(1.0, 0.0))
}

/// `ch(k)` and `sh(k)` of an operator matrix (quadrature weight already
/// absorbed).
pub fn ch_sh_matrix(k: &Array2<Complex64>) -> Result<BogoliubovPair> {
    let dim = k.nrows();
    if k.ncols() != dim {
        return Err(Error::InvalidParameter("kernel matrix must be square".into()));
    }
    let a = k.dot(&k.mapv(|v| v.conj()));
    let a_norm = frobenius(&a);
    if !a_norm.is_finite() {
        return Err(Error::NonFinite("k k̄".into()));
    }
    let mut ch = eye(dim);
    let mut s = eye(dim);
    let mut pow = eye(dim);
    let mut fact = 1.0;
    let mut n_max = 0;
    let mut tail = a_norm / 2.0;
    if tail >= SERIES_TOL {
        let mut converged = false;
        for n in 1..=MAX_SERIES_TERMS {
            pow = pow.dot(&a);
            fact *= ((2 * n - 1) * 2 * n) as f64;
            let term = frobenius(&pow) / fact;
            if !term.is_finite() {
                return Err(Error::SeriesDivergence { terms: n, tail: term });
            }
            ch.scaled_add(Complex64::new(1.0 / fact, 0.0), &pow);
            s.scaled_add(Complex64::new(1.0 / (fact * (2 * n + 1) as f64), 0.0), &pow);
            n_max = n;
            tail = term * a_norm / ((2 * n + 1) * (2 * n + 2)) as f64;
            if term < SERIES_TOL && tail < SERIES_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::SeriesDivergence {
                terms: MAX_SERIES_TERMS,
                tail,
            });
        }
    }
    let sh = s.dot(k);
    let p = &ch - &eye(dim);
    let r = &sh - k;
    Ok(BogoliubovPair { ch, sh, p, r, n_max, tail })
}

pub fn ch_sh(kb: &KernelBlock) -> Result<BogoliubovPair> {
    ch_sh_matrix(&kb.weighted())
}

/// `max(‖ch ch* - sh sh* - 1‖_F, ‖ch shᵀ - (ch shᵀ)ᵀ‖_F)`.
pub fn symplectic_residual(bp: &BogoliubovPair) -> f64 {
    let dim = bp.ch.nrows();
    let herm = |a: &Array2<Complex64>| a.t().mapv(|v| v.conj());
    let g = bp.ch.dot(&herm(&bp.ch)) - bp.sh.dot(&herm(&bp.sh)) - eye(dim);
    let c = bp.ch.dot(&bp.sh.t());
    let anti = &c - &c.t();
    frobenius(&g).max(frobenius(&anti))
}

#[derive(Debug, Clone, Serialize)]
pub struct PointwiseReport {
    /// `sup |k(x,y)|_F (|x-y| + 1/N) / (|φ(x)| |φ(y)|)`, or `None` when no
    /// pair has a non-negligible field.
    pub constant: Option<f64>,
    pub pairs: usize,
    pub ceiling: f64,
    pub exceeding: usize,
    /// Up to 16 offending `(x, y, value)` triples.
    pub flagged: Vec<(usize, usize, f64)>,
}

/// Empirical constant of the pointwise bound over all coarse pairs.
pub fn pointwise_bound_report(kb: &KernelBlock, ceiling: f64) -> PointwiseReport {
    let p = kb.points();
    let amp: Vec<f64> = (0..p)
        .map(|x| (kb.phi[0][x].norm_sqr() + kb.phi[1][x].norm_sqr()).sqrt())
        .collect();
    let amax = amp.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-12 * amax * amax;
    let inv_n = 1.0 / kb.n_scale;
    let per_row: Vec<(usize, f64, Vec<(usize, usize, f64)>)> = (0..p)
        .into_par_iter()
        .map(|x| {
            let mut count = 0;
            let mut best: f64 = 0.0;
            let mut over = Vec::new();
            for y in 0..p {
                let den = amp[x] * amp[y];
                if !(den > floor) {
                    continue;
                }
                count += 1;
                let mut fro = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        fro += kb.k[[i * p + x, j * p + y]].norm_sqr();
                    }
                }
                let d = if x == y { 0.0 } else { kb.distance(x, y) };
                let v = fro.sqrt() * (d + inv_n) / den;
                best = best.max(v);
                if v > ceiling {
                    over.push((x, y, v));
                }
            }
            (count, best, over)
        })
        .collect();
    let pairs: usize = per_row.iter().map(|r| r.0).sum();
    let exceeding = per_row.iter().map(|r| r.2.len()).sum();
    let flagged = per_row.iter().flat_map(|r| r.2.iter().cloned()).take(16).collect();
    let constant = (pairs > 0).then(|| per_row.iter().map(|r| r.1).fold(0.0, f64::max));
    PointwiseReport {
        constant,
        pairs,
        ceiling,
        exceeding,
        flagged,
    }
}

/// `μ₀ = -½ Σ_ij ∬ N³λV_ij(N(x-y)) ρ_i(x) ρ_j(y)` by spectral convolution;
/// `pots` and `lambda` are ordered 11, 22, 12.
pub fn mu0(
    spec: &Spectral,
    f: &Field2C,
    pots: [&RadialPotential; 3],
    lambda: [f64; 3],
    n_particles: u64,
) -> Result<f64> {
    let w = spec.grid().cell_volume();
    let rho = [f.density(0), f.density(1)];
    let mut total = 0.0;
    for (pair, (i, j), mult) in [(0, (0, 0), 1.0), (1, (1, 1), 1.0), (2, (0, 1), 2.0)] {
        if pots[pair].is_zero() {
            continue;
        }
        let c = CouplingSpec::new(lambda[pair], n_particles, PairTag::ALL[pair])?;
        let m = spec.sample_profile(&radial_fourier(pots[pair], &c, None::<Arc<_>>)?)?;
        let conv = spec.convolve_density(&rho[j], &m)?;
        total += mult * w * rho[i].iter().zip(&conv).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(-0.5 * total)
}
