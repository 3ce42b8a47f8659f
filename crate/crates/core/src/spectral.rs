//! FFT context on a [`Grid3`]: transforms, Fourier multipliers, density
//! convolutions and spectral derivatives.
//!
//! The forward transform is unnormalized and the inverse divides by `n³`.
//! A multiplier `m(ξ)` applied to `ρ̂` realizes the periodic convolution
//! with the kernel whose continuum transform is `m`; multipliers built from
//! real-space kernels carry the `h³` quadrature weight.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::potentials::SpectralProfile;

/// Relative imaginary residue tolerated after a convolution.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Fourier multiplier sampled on the wavenumber lattice.
#[derive(Debug, Clone)]
pub struct Multiplier {
    values: Vec<Complex64>,
    zero: bool,
}

impl Multiplier {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Value at `ξ = 0`.
    pub fn at_origin(&self) -> Complex64 {
        self.values[0]
    }
}

pub struct Spectral {
    grid: Grid3,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `|ξ|²` per flat index.
    k2: Vec<f64>,
    /// Per-axis derivative wavenumbers with the Nyquist mode removed.
    kd: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid3) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let k: Vec<f64> = (0..n).map(|i| grid.wavenumber(i)).collect();
        let kd: Vec<f64> = (0..n)
            .map(|i| if i == n / 2 { 0.0 } else { k[i] })
            .collect();
        let mut k2 = vec![0.0; grid.len()];
        for (idx, v) in k2.iter_mut().enumerate() {
            let [a, b, c] = grid.unflatten(idx);
            *v = k[a] * k[a] + k[b] * k[b] + k[c] * k[c];
        }
        Self {
            grid,
            fwd,
            inv,
            k2,
            kd,
        }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        let n2 = n * n;
        assert_eq!(data.len(), n2 * n, "array does not match grid");
        // z: contiguous lines
        data.par_chunks_mut(n2).for_each(|plane| fft.process(plane));
        // y: transpose each x-plane
        data.par_chunks_mut(n2).for_each(|plane| {
            let mut buf = vec![Complex64::default(); n2];
            for iy in 0..n {
                for iz in 0..n {
                    buf[iz * n + iy] = plane[iy * n + iz];
                }
            }
            fft.process(&mut buf);
            for iy in 0..n {
                for iz in 0..n {
                    plane[iy * n + iz] = buf[iz * n + iy];
                }
            }
        });
        // x: gather (x, z) slabs per y
        let src: &[Complex64] = data;
        let slabs: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|iy| {
                let mut buf = vec![Complex64::default(); n2];
                for ix in 0..n {
                    for iz in 0..n {
                        buf[iz * n + ix] = src[(ix * n + iy) * n + iz];
                    }
                }
                fft.process(&mut buf);
                buf
            })
            .collect();
        for (iy, buf) in slabs.iter().enumerate() {
            for ix in 0..n {
                for iz in 0..n {
                    data[(ix * n + iy) * n + iz] = buf[iz * n + ix];
                }
            }
        }
    }

    /// In-place unnormalized forward transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
    }

    /// In-place inverse transform, normalized by `1/n³`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
        let s = 1.0 / self.grid.len() as f64;
        data.par_iter_mut().for_each(|v| *v *= s);
    }

    /// Samples a radial transform `Û(|ξ|)` on the lattice, evaluating each
    /// distinct `|ξ|²` once.
    pub fn sample_profile(&self, prof: &SpectralProfile) -> Result<Multiplier> {
        let len = self.grid.len();
        if prof.is_zero() {
            return Ok(Multiplier {
                values: vec![Complex64::default(); len],
                zero: true,
            });
        }
        let g = self.grid;
        let half = (g.n() / 2) as i64;
        let max_m2 = (3 * half * half) as usize;
        let mut m2_of = vec![0usize; len];
        let mut needed = vec![false; max_m2 + 1];
        for (idx, m2) in m2_of.iter_mut().enumerate() {
            let [a, b, c] = g.unflatten(idx);
            let s: i64 = [a, b, c].iter().map(|&i| g.freq_index(i).pow(2)).sum();
            *m2 = s as usize;
            needed[*m2] = true;
        }
        let dk = 2.0 * std::f64::consts::PI / g.box_length();
        let keys: Vec<usize> = (0..=max_m2).filter(|&m| needed[m]).collect();
        let vals: Vec<Result<f64>> = keys
            .par_iter()
            .map(|&m2| prof.eval(dk * (m2 as f64).sqrt()))
            .collect();
        let mut table = vec![0.0; max_m2 + 1];
        for (&m2, v) in keys.iter().zip(vals) {
            table[m2] = v?;
        }
        let values = m2_of.iter().map(|&m2| Complex64::new(table[m2], 0.0)).collect();
        Ok(Multiplier { values, zero: false })
    }

    /// Multiplier of the periodic convolution with a real-space kernel
    /// `g`, sampled at nearest-image displacements.
    pub fn kernel_multiplier<G: Fn([f64; 3]) -> f64 + Sync>(&self, g: G) -> Multiplier {
        let grid = self.grid;
        let mut data: Vec<Complex64> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let [a, b, c] = grid.unflatten(idx);
                let d = [grid.displacement(a), grid.displacement(b), grid.displacement(c)];
                Complex64::new(g(d), 0.0)
            })
            .collect();
        let zero = data.iter().all(|v| v.re == 0.0);
        self.forward(&mut data);
        let w = grid.cell_volume();
        data.par_iter_mut().for_each(|v| *v *= w);
        Multiplier { values: data, zero }
    }

    /// Periodic convolution of a real density with a multiplier. The
    /// imaginary part of the result must vanish to [`IMAG_RESIDUE_TOL`]
    /// relative to the real part.
    pub fn convolve_density(&self, rho: &[f64], m: &Multiplier) -> Result<Vec<f64>> {
        if rho.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "density has {} entries, grid has {}",
                rho.len(),
                self.grid.len()
            )));
        }
        if m.zero {
            return Ok(vec![0.0; rho.len()]);
        }
        let mut data: Vec<Complex64> = rho.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        self.forward(&mut data);
        data.par_iter_mut()
            .zip(m.values.par_iter())
            .for_each(|(d, v)| *d *= v);
        self.inverse(&mut data);
        let max_re = data.iter().fold(0.0f64, |a, v| a.max(v.re.abs()));
        let max_im = data.iter().fold(0.0f64, |a, v| a.max(v.im.abs()));
        let scale = max_re.max(f64::MIN_POSITIVE);
        if max_im > IMAG_RESIDUE_TOL * scale && max_im > 1e-300 {
            return Err(Error::ImaginaryResidue {
                residue: max_im / scale,
            });
        }
        Ok(data.into_iter().map(|v| v.re).collect())
    }

    /// `e^{-i |ξ|² dt}` per mode.
    pub fn kinetic_phase(&self, dt: f64) -> Vec<Complex64> {
        self.k2
            .par_iter()
            .map(|&k2| Complex64::from_polar(1.0, -k2 * dt))
            .collect()
    }

    /// Multiplies every mode of `psi` by `phase`.
    pub fn apply_modes(&self, psi: &mut [Complex64], phase: &[Complex64]) {
        self.forward(psi);
        psi.par_iter_mut().zip(phase.par_iter()).for_each(|(p, m)| *p *= m);
        self.inverse(psi);
    }

    /// Exact free flight `e^{iΔ dt}` of a single component.
    pub fn apply_kinetic(&self, psi: &mut [Complex64], dt: f64) {
        if dt == 0.0 {
            return;
        }
        let phase = self.kinetic_phase(dt);
        self.apply_modes(psi, &phase);
    }

    /// Spectral gradient (Nyquist mode dropped so real data stays real).
    pub fn gradient(&self, psi: &[Complex64]) -> [Vec<Complex64>; 3] {
        let g = self.grid;
        let mut hat = psi.to_vec();
        self.forward(&mut hat);
        let comp = |axis: usize| {
            let mut d: Vec<Complex64> = hat
                .par_iter()
                .enumerate()
                .map(|(idx, v)| {
                    let k = self.kd[g.unflatten(idx)[axis]];
                    v * Complex64::new(0.0, k)
                })
                .collect();
            self.inverse(&mut d);
            d
        };
        [comp(0), comp(1), comp(2)]
    }

    /// `∫|∇ψ|²` through Parseval with the full `|ξ|²` symbol.
    pub fn kinetic_integral(&self, psi: &[Complex64]) -> f64 {
        let mut hat = psi.to_vec();
        self.forward(&mut hat);
        let s: f64 = hat.iter().zip(&self.k2).map(|(v, k2)| k2 * v.norm_sqr()).sum();
        s * self.grid.cell_volume() / self.grid.len() as f64
    }

    /// `-Δψ` spectrally.
    pub fn neg_laplacian(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut hat = psi.to_vec();
        self.forward(&mut hat);
        hat.par_iter_mut().zip(self.k2.par_iter()).for_each(|(v, k2)| *v *= k2);
        self.inverse(&mut hat);
        hat
    }

    /// `∫ f g` with the `h³` weight.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{radial_fourier, CouplingSpec, PairTag, RadialPotential};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(len: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    /// Direct O(n⁶) DFT along all three axes.
    fn dft3(g: &Grid3, x: &[Complex64]) -> Vec<Complex64> {
        let n = g.n();
        let w = |a: usize, b: usize| {
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (a * b % n) as f64 / n as f64)
        };
        (0..g.len())
            .map(|k| {
                let [ka, kb, kc] = g.unflatten(k);
                (0..g.len())
                    .map(|j| {
                        let [a, b, c] = g.unflatten(j);
                        x[j] * w(ka, a) * w(kb, b) * w(kc, c)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn transform_matches_direct_dft() {
        let g = Grid3::new(8, 3.0).unwrap();
        let s = Spectral::new(g);
        let x = random_field(g.len(), 1);
        let mut y = x.clone();
        s.forward(&mut y);
        let d = dft3(&g, &x);
        for (a, b) in y.iter().zip(&d) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        for n in [8, 12, 16] {
            let g = Grid3::new(n, 5.0).unwrap();
            let s = Spectral::new(g);
            let x = random_field(g.len(), n as u64);
            let mut y = x.clone();
            s.forward(&mut y);
            let hx: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.cell_volume();
            let hy: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.cell_volume().powi(2)
                / g.volume();
            assert!((hx - hy).abs() < 1e-12 * hx);
            s.inverse(&mut y);
            let scale = x.iter().fold(0.0f64, |a, v| a.max(v.norm()));
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).norm() < 1e-13 * scale);
            }
        }
    }

    #[test]
    fn constant_density_convolution() {
        let g = Grid3::new(8, 4.0).unwrap();
        let s = Spectral::new(g);
        let pot = RadialPotential::square_well(2.0, 1.0).unwrap();
        let c = CouplingSpec::new(1.0, 8, PairTag::P11).unwrap();
        let m = s.sample_profile(&radial_fourier(&pot, &c, None).unwrap()).unwrap();
        let out = s.convolve_density(&vec![0.7; g.len()], &m).unwrap();
        let u0 = 8.0 * std::f64::consts::PI / 3.0;
        for v in out {
            assert!((v - 0.7 * u0).abs() < 1e-10);
        }
        let z = s.sample_profile(&SpectralProfile::zero()).unwrap();
        assert!(s.convolve_density(&vec![1.0; g.len()], &z).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn real_kernel_matches_direct_sum() {
        let g = Grid3::new(8, 4.0).unwrap();
        let s = Spectral::new(g);
        let kernel = |d: [f64; 3]| (-(d[0] * d[0] + 2.0 * d[1] * d[1] + d[2] * d[2])).exp();
        let m = s.kernel_multiplier(kernel);
        let mut rho = vec![0.0; g.len()];
        rho[g.index(2, 5, 3)] = 1.5;
        rho[g.index(4, 4, 4)] = 0.25;
        let got = s.convolve_density(&rho, &m).unwrap();
        let n = g.n();
        for i in 0..g.len() {
            let [a, b, c] = g.unflatten(i);
            let mut acc = 0.0;
            for j in 0..g.len() {
                let [p, q, r] = g.unflatten(j);
                let d = [
                    g.displacement((a + n - p) % n),
                    g.displacement((b + n - q) % n),
                    g.displacement((c + n - r) % n),
                ];
                acc += g.cell_volume() * kernel(d) * rho[j];
            }
            assert!((got[i] - acc).abs() < 1e-10 * acc.abs().max(1e-3));
        }
    }

    #[test]
    fn detects_imaginary_residue() {
        let g = Grid3::new(8, 4.0).unwrap();
        let s = Spectral::new(g);
        let mut m = s.kernel_multiplier(|d| (-(d[0] * d[0])).exp());
        m.values[1] += Complex64::new(0.0, 0.3);
        let mut rho = vec![0.0; g.len()];
        rho[7] = 1.0;
        assert!(matches!(
            s.convolve_density(&rho, &m),
            Err(Error::ImaginaryResidue { .. })
        ));
    }

    #[test]
    fn convolution_commutes_with_translation() {
        let g = Grid3::new(8, 4.0).unwrap();
        let s = Spectral::new(g);
        let pot = RadialPotential::shell(1.0, 0.2, 1.0).unwrap();
        let c = CouplingSpec::new(2.0, 2, PairTag::P12).unwrap();
        let m = s.sample_profile(&radial_fourier(&pot, &c, None).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let n = g.n();
        let shift = |v: &[f64]| {
            let mut out = vec![0.0; v.len()];
            for i in 0..v.len() {
                let [a, b, c] = g.unflatten(i);
                out[g.index((a + 3) % n, (b + 1) % n, c)] = v[i];
            }
            out
        };
        let a = shift(&s.convolve_density(&rho, &m).unwrap());
        let b = s.convolve_density(&shift(&rho), &m).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn kinetic_on_plane_wave() {
        let g = Grid3::new(16, 6.0).unwrap();
        let s = Spectral::new(g);
        let k = [g.wavenumber(2), g.wavenumber(15), g.wavenumber(5)];
        let kk = k.iter().map(|v| v * v).sum::<f64>();
        let wave: Vec<Complex64> = (0..g.len())
            .map(|i| {
                let x = g.position(i);
                Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2])
            })
            .collect();
        let mut psi = wave.clone();
        s.apply_kinetic(&mut psi, 0.0);
        assert_eq!(psi, wave);
        let dt = 0.37;
        s.apply_kinetic(&mut psi, dt);
        let ph = Complex64::from_polar(1.0, -kk * dt);
        for (a, b) in psi.iter().zip(&wave) {
            assert!((a - b * ph).norm() < 1e-12);
        }
        let ke = s.kinetic_integral(&wave);
        assert!((ke - kk * g.volume()).abs() < 1e-10 * ke);
        let grad = s.gradient(&wave);
        for axis in 0..3 {
            for (d, w) in grad[axis].iter().zip(&wave) {
                assert!((d - w * Complex64::new(0.0, k[axis])).norm() < 1e-11);
            }
        }
    }
}
