//! Two-component complex fields and their norms.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::spectral::Spectral;

#[derive(Debug, Clone, PartialEq)]
pub struct Field2C {
    pub grid: Grid3,
    pub phi: [Vec<Complex64>; 2],
    pub t: f64,
}

impl Field2C {
    pub fn zeros(grid: Grid3) -> Self {
        Self {
            grid,
            phi: [vec![Complex64::default(); grid.len()], vec![Complex64::default(); grid.len()]],
            t: 0.0,
        }
    }

    pub fn from_arrays(grid: Grid3, phi1: Vec<Complex64>, phi2: Vec<Complex64>, t: f64) -> Result<Self> {
        if phi1.len() != grid.len() || phi2.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "field arrays have {} and {} entries, grid needs {}",
                phi1.len(),
                phi2.len(),
                grid.len()
            )));
        }
        let f = Self {
            grid,
            phi: [phi1, phi2],
            t,
        };
        f.check_finite()?;
        Ok(f)
    }

    /// Samples `(φ₁, φ₂)` from functions of position.
    pub fn from_fn<F1, F2>(grid: Grid3, f1: F1, f2: F2) -> Self
    where
        F1: Fn([f64; 3]) -> Complex64,
        F2: Fn([f64; 3]) -> Complex64,
    {
        let phi1 = (0..grid.len()).map(|i| f1(grid.position(i))).collect();
        let phi2 = (0..grid.len()).map(|i| f2(grid.position(i))).collect();
        Self {
            grid,
            phi: [phi1, phi2],
            t: 0.0,
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        for (s, phi) in self.phi.iter().enumerate() {
            if let Some(i) = phi.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::NonFinite(format!("species {} at index {i}", s + 1)));
            }
        }
        Ok(())
    }

    pub fn density(&self, species: usize) -> Vec<f64> {
        self.phi[species].iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn total_density(&self) -> Vec<f64> {
        self.phi[0]
            .iter()
            .zip(&self.phi[1])
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }

    /// `h³ Σ |φᵢ|²` per species.
    pub fn masses(&self) -> [f64; 2] {
        let w = self.grid.cell_volume();
        [0, 1].map(|s| self.phi[s].iter().map(|v| v.norm_sqr()).sum::<f64>() * w)
    }

    pub fn scale(&mut self, s: [f64; 2]) {
        for (phi, s) in self.phi.iter_mut().zip(s) {
            phi.iter_mut().for_each(|v| *v *= s);
        }
    }

    /// Rescales each species to the given mass.
    pub fn normalize_to(&mut self, targets: [f64; 2]) -> Result<()> {
        let m = self.masses();
        let mut s = [0.0; 2];
        for i in 0..2 {
            if targets[i] == 0.0 {
                s[i] = 0.0;
            } else if m[i] > 0.0 {
                s[i] = (targets[i] / m[i]).sqrt();
            } else {
                return Err(Error::InvalidParameter(format!(
                    "cannot normalize species {} with zero mass",
                    i + 1
                )));
            }
        }
        self.scale(s);
        Ok(())
    }

    pub fn conj(&mut self) {
        for phi in &mut self.phi {
            phi.iter_mut().for_each(|v| *v = v.conj());
        }
    }

    /// Componentwise difference `self - other` on the same grid.
    pub fn difference(&self, other: &Field2C) -> Result<Field2C> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        let d = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x - y).collect();
        Ok(Field2C {
            grid: self.grid,
            phi: [d(&self.phi[0], &other.phi[0]), d(&self.phi[1], &other.phi[1])],
            t: self.t,
        })
    }

    /// Largest total density in the outermost index shell relative to the
    /// global maximum (0 for a zero field).
    pub fn boundary_ratio(&self) -> f64 {
        let rho = self.total_density();
        let max = rho.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let edge = rho
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.on_boundary(*i))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        edge / max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NormKind {
    L2,
    H1,
    Linf,
    L4,
    Lp(f64),
    /// `max(‖φ‖∞, ‖∂₁φ‖∞, ‖∂₂φ‖∞, ‖∂₃φ‖∞)`.
    W1Inf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormValue {
    pub species: [f64; 2],
    /// Root-sum-square over species.
    pub combined: f64,
}

impl NormValue {
    fn from_species(species: [f64; 2]) -> Self {
        Self {
            species,
            combined: (species[0] * species[0] + species[1] * species[1]).sqrt(),
        }
    }
}

fn lp(psi: &[Complex64], p: f64, w: f64) -> f64 {
    (psi.iter().map(|v| v.norm().powf(p)).sum::<f64>() * w).powf(1.0 / p)
}

fn linf(psi: &[Complex64]) -> f64 {
    psi.iter().fold(0.0f64, |a, v| a.max(v.norm()))
}

/// Norm of each species and the combined value.
pub fn norm(spec: &Spectral, f: &Field2C, kind: NormKind) -> Result<NormValue> {
    if *spec.grid() != f.grid {
        return Err(Error::GridMismatch("field and transform grids differ".into()));
    }
    f.check_finite()?;
    let w = f.grid.cell_volume();
    let per = |psi: &Vec<Complex64>| -> Result<f64> {
        Ok(match kind {
            NormKind::L2 => lp(psi, 2.0, w),
            NormKind::L4 => {
                let s: f64 = psi.iter().map(|v| v.norm_sqr().powi(2)).sum();
                (s * w).powf(0.25)
            }
            NormKind::Lp(p) => {
                if !(p >= 1.0) {
                    return Err(Error::InvalidParameter(format!("Lp needs p >= 1, got {p}")));
                }
                lp(psi, p, w)
            }
            NormKind::Linf => linf(psi),
            NormKind::H1 => {
                let l2 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>() * w;
                (l2 + spec.kinetic_integral(psi)).sqrt()
            }
            NormKind::W1Inf => {
                let g = spec.gradient(psi);
                g.iter().map(|d| linf(d)).fold(linf(psi), f64::max)
            }
        })
    };
    Ok(NormValue::from_species([per(&f.phi[0])?, per(&f.phi[1])?]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_field() {
        let g = Grid3::new(8, 3.0).unwrap();
        let s = Spectral::new(g);
        let c = Complex64::new(0.6, -0.8) * 2.0;
        let f = Field2C::from_fn(g, |_| c, |_| Complex64::default());
        let l2 = norm(&s, &f, NormKind::L2).unwrap();
        let h1 = norm(&s, &f, NormKind::H1).unwrap();
        let expect = 2.0 * 3.0f64.powf(1.5);
        assert!((l2.species[0] - expect).abs() < 1e-12);
        assert!((h1.species[0] - expect).abs() < 1e-12);
        assert_eq!(l2.species[1], 0.0);
        assert!((l2.combined - expect).abs() < 1e-12);
    }

    #[test]
    fn plane_wave_h1() {
        let g = Grid3::new(16, 5.0).unwrap();
        let s = Spectral::new(g);
        let k = [g.wavenumber(1), g.wavenumber(3), g.wavenumber(14)];
        let f = Field2C::from_fn(
            g,
            |x| Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]),
            |_| Complex64::default(),
        );
        let h1 = norm(&s, &f, NormKind::H1).unwrap().species[0];
        let kk: f64 = k.iter().map(|v| v * v).sum();
        assert!((h1 * h1 - g.volume() * (1.0 + kk)).abs() < 1e-9 * h1 * h1);
        let w1 = norm(&s, &f, NormKind::W1Inf).unwrap().species[0];
        let kmax = k.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        assert!((w1 - kmax).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid3::new(8, 3.0).unwrap();
        let s = Spectral::new(g);
        let mut f = Field2C::zeros(g);
        f.phi[1][5] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(norm(&s, &f, NormKind::L2), Err(Error::NonFinite(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn holder_bound(seed in 0u64..10_000) {
            let g = Grid3::new(8, 2.0).unwrap();
            let s = Spectral::new(g);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut r = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let phi1 = (0..g.len()).map(|_| r()).collect();
            let phi2 = (0..g.len()).map(|_| r()).collect();
            let f = Field2C::from_arrays(g, phi1, phi2, 0.0).unwrap();
            let l4 = norm(&s, &f, NormKind::L4).unwrap();
            let l2 = norm(&s, &f, NormKind::L2).unwrap();
            let li = norm(&s, &f, NormKind::Linf).unwrap();
            let l4p = norm(&s, &f, NormKind::Lp(4.0)).unwrap();
            for i in 0..2 {
                prop_assert!(l4.species[i].powi(4) <= li.species[i].powi(2) * l2.species[i].powi(2) * (1.0 + 1e-12));
                prop_assert!((l4.species[i] - l4p.species[i]).abs() < 1e-12 * l4.species[i]);
            }
        }
    }
}
