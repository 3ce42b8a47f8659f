//! Periodic cubic grid centred on the origin.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// `n³` points on `[-L/2, L/2)³`, spacing `h = L / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid3 {
    n: usize,
    l: f64,
}

/// FFT-friendly sizes: even and 5-smooth.
pub fn is_supported_size(n: usize) -> bool {
    if n < 8 || n % 2 != 0 {
        return false;
    }
    let mut m = n;
    for p in [2, 3, 5] {
        while m % p == 0 {
            m /= p;
        }
    }
    m == 1
}

impl Grid3 {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if !is_supported_size(n) {
            return Err(Error::InvalidParameter(format!(
                "grid size n = {n} must be even, >= 8 and have no prime factors beyond 5"
            )));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidParameter(format!("box length must be > 0, got {l}")));
        }
        Ok(Self { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn box_length(&self) -> f64 {
        self.l
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Quadrature weight `h³`.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.l.powi(3)
    }

    /// Coordinate of index `i` along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.l + i as f64 * self.h()
    }

    /// Signed frequency index in `[-n/2, n/2)`.
    pub fn freq_index(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Discrete wavenumber `2π m / L`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * PI * self.freq_index(i) as f64 / self.l
    }

    /// Signed displacement of index offset `i`, nearest image; the
    /// half-way offset maps to `-L/2`.
    pub fn displacement(&self, i: usize) -> f64 {
        self.freq_index(i) as f64 * self.h()
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    pub fn unflatten(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let [ix, iy, iz] = self.unflatten(idx);
        [self.coord(ix), self.coord(iy), self.coord(iz)]
    }

    /// Whether `idx` lies in the outermost index shell.
    pub fn on_boundary(&self, idx: usize) -> bool {
        let last = self.n - 1;
        self.unflatten(idx).iter().any(|&i| i == 0 || i == last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        for n in [8, 10, 12, 16, 24, 32, 48, 64, 96] {
            assert!(is_supported_size(n), "{n}");
        }
        for n in [0, 4, 6, 7, 9, 14, 22, 33] {
            assert!(!is_supported_size(n), "{n}");
        }
        assert!(Grid3::new(16, 0.0).is_err());
    }

    #[test]
    fn layout() {
        let g = Grid3::new(8, 4.0).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.coord(0), -2.0);
        assert_eq!(g.coord(4), 0.0);
        assert_eq!(g.freq_index(4), -4);
        assert_eq!(g.freq_index(3), 3);
        assert_eq!(g.displacement(7), -0.5);
        let idx = g.index(1, 2, 3);
        assert_eq!(idx, (8 + 2) * 8 + 3);
        assert_eq!(g.unflatten(idx), [1, 2, 3]);
        assert!(g.on_boundary(g.index(0, 3, 3)));
        assert!(g.on_boundary(g.index(3, 7, 3)));
        assert!(!g.on_boundary(g.index(3, 3, 3)));
    }
}
