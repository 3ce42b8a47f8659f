//! Piecewise cubic Hermite tables on strictly increasing nodes.

use crate::error::{Error, Result};

/// Cubic Hermite interpolant through `(x[i], y[i])` with slopes `dy[i]`.
/// Outside `[x[0], x[last]]` the table evaluates to `outside`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteTable {
    x: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
    outside: f64,
}

impl HermiteTable {
    pub fn new(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>, outside: f64) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() || x.len() != dy.len() {
            return Err(Error::InvalidParameter(format!(
                "table needs >= 2 nodes with matching lengths (got {}, {}, {})",
                x.len(),
                y.len(),
                dy.len()
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "table nodes must be strictly increasing".into(),
            ));
        }
        Ok(Self { x, y, dy, outside })
    }

    /// Monotone (Fritsch–Carlson) cubic through the given samples.
    pub fn monotone(x: Vec<f64>, y: Vec<f64>, outside: f64) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidParameter(
                "monotone table needs >= 2 nodes with matching lengths".into(),
            ));
        }
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
            .collect();
        let mut d = vec![0.0; n];
        d[0] = secants[0];
        d[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (s0, s1) = (secants[i - 1], secants[i]);
            if s0 * s1 <= 0.0 {
                d[i] = 0.0;
            } else {
                // weighted harmonic mean keeps the interpolant monotone
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w0 = 2.0 * h1 + h0;
                let w1 = h1 + 2.0 * h0;
                d[i] = (w0 + w1) / (w0 / s0 + w1 / s1);
            }
        }
        for i in 0..n - 1 {
            let s = secants[i];
            if s == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
                continue;
            }
            let a = d[i] / s;
            let b = d[i + 1] / s;
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                d[i] = t * a * s;
                d[i + 1] = t * b * s;
            }
        }
        Self::new(x, y, d, outside)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.dy
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn locate(&self, t: f64) -> usize {
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < self.x_min() || t > self.x_max() || t.is_nan() {
            return self.outside;
        }
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.dy[i] + h01 * self.y[i + 1] + h11 * h * self.dy[i + 1]
    }

    pub fn eval_deriv(&self, t: f64) -> f64 {
        if t < self.x_min() || t > self.x_max() || t.is_nan() {
            return 0.0;
        }
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        d00 * self.y[i] + d10 * self.dy[i] + d01 * self.y[i + 1] + d11 * self.dy[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hermite_reproduces_cubics() {
        let x: Vec<f64> = (0..6).map(|i| i as f64 * 0.4).collect();
        let f = |t: f64| t * t * t - t + 2.0;
        let df = |t: f64| 3.0 * t * t - 1.0;
        let tab = HermiteTable::new(
            x.clone(),
            x.iter().map(|&t| f(t)).collect(),
            x.iter().map(|&t| df(t)).collect(),
            0.0,
        )
        .unwrap();
        for k in 0..50 {
            let t = k as f64 * 0.04;
            assert!((tab.eval(t) - f(t)).abs() < 1e-13);
            assert!((tab.eval_deriv(t) - df(t)).abs() < 1e-12);
        }
        assert_eq!(tab.eval(2.5), 0.0);
    }

    #[test]
    fn rejects_non_increasing() {
        assert!(HermiteTable::monotone(vec![0.0, 1.0, 1.0], vec![0.0; 3], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(
            steps in proptest::collection::vec((0.01f64..1.0, 0.0f64..2.0), 2..12)
        ) {
            let mut x = vec![0.0];
            let mut y = vec![5.0];
            for (dx, dy) in &steps {
                x.push(x.last().unwrap() + dx);
                y.push(y.last().unwrap() - dy);
            }
            let tab = HermiteTable::monotone(x.clone(), y, 0.0).unwrap();
            let xmax = *x.last().unwrap();
            let mut prev = f64::INFINITY;
            for k in 0..=400 {
                let v = tab.eval((xmax * k as f64 / 400.0).min(xmax));
                prop_assert!(v <= prev + 1e-12);
                prev = v;
            }
        }
    }
}
