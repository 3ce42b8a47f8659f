//! Radial pair potentials, their coupling and particle-number scaling, and
//! the radial Fourier transform used for spectral convolution.
//!
//! All potentials are radial, nonnegative and compactly supported on
//! `|x| <= b`. The mean-field kernel of the modified system is
//! `N^3 λ V(N|x|) f(N|x|)`; its transform is computed by one-dimensional
//! quadrature of the radial integral, so the narrow kernel never has to be
//! resolved on a grid.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::HermiteTable;
use crate::quadrature::{integrate_pieces, QuadOptions};

/// Species pair an interaction acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairTag {
    #[serde(rename = "11")]
    P11,
    #[serde(rename = "22")]
    P22,
    #[serde(rename = "12")]
    P12,
}

impl PairTag {
    pub const ALL: [PairTag; 3] = [PairTag::P11, PairTag::P22, PairTag::P12];

    pub fn as_str(self) -> &'static str {
        match self {
            PairTag::P11 => "11",
            PairTag::P22 => "22",
            PairTag::P12 => "12",
        }
    }

    pub fn index(self) -> usize {
        match self {
            PairTag::P11 => 0,
            PairTag::P22 => 1,
            PairTag::P12 => 2,
        }
    }

    /// Pair acting between species `i` and `j` (0-based).
    pub fn of(i: usize, j: usize) -> PairTag {
        match (i, j) {
            (0, 0) => PairTag::P11,
            (1, 1) => PairTag::P22,
            _ => PairTag::P12,
        }
    }
}

impl fmt::Display for PairTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "11" => Ok(PairTag::P11),
            "22" => Ok(PairTag::P22),
            "12" | "21" => Ok(PairTag::P12),
            other => Err(Error::InvalidParameter(format!("unknown species pair `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialProfile {
    /// `V0` on `r <= b`.
    SquareWell { v0: f64, b: f64 },
    /// `V0` on `r0 <= r <= b`.
    Shell { v0: f64, r0: f64, b: f64 },
    /// Monotone cubic through tabulated samples, zero beyond the last node.
    Table(Arc<HermiteTable>),
}

/// Nonnegative radial potential with compact support.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPotential {
    profile: PotentialProfile,
}

impl RadialPotential {
    pub fn square_well(v0: f64, b: f64) -> Result<Self> {
        if !(v0 >= 0.0) || !v0.is_finite() {
            return Err(Error::InvalidPotential(format!("square well height must be >= 0, got {v0}")));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidPotential(format!("support radius must be > 0, got {b}")));
        }
        Ok(Self {
            profile: PotentialProfile::SquareWell { v0, b },
        })
    }

    pub fn shell(v0: f64, r0: f64, b: f64) -> Result<Self> {
        if !(v0 >= 0.0) || !v0.is_finite() {
            return Err(Error::InvalidPotential(format!("shell height must be >= 0, got {v0}")));
        }
        if !(b > 0.0 && r0 >= 0.0 && r0 < b) {
            return Err(Error::InvalidPotential(format!(
                "shell needs 0 <= r0 < b, got r0 = {r0}, b = {b}"
            )));
        }
        Ok(Self {
            profile: PotentialProfile::Shell { v0, r0, b },
        })
    }

    /// Tabulated profile; the last node is the support radius.
    pub fn table(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.len() < 2 || r.len() != v.len() {
            return Err(Error::InvalidPotential(
                "table needs at least two (r, v) rows".into(),
            ));
        }
        if r[0] < 0.0 {
            return Err(Error::InvalidPotential("table radii must be >= 0".into()));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPotential(
                "table radii must be strictly increasing".into(),
            ));
        }
        if let Some(bad) = v.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "potential must be nonnegative and finite, found {bad}"
            )));
        }
        let tab = HermiteTable::monotone(r, v, 0.0)?;
        Ok(Self {
            profile: PotentialProfile::Table(Arc::new(tab)),
        })
    }

    /// Reads a two-column `r v` text table; `#` starts a comment.
    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut r = Vec::new();
        let mut v = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::InvalidPotential(format!(
                    "{}:{}: expected two columns",
                    path.display(),
                    lineno + 1
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidPotential(format!("{}:{}: bad number `{s}`", path.display(), lineno + 1))
                })
            };
            r.push(parse(cols[0])?);
            v.push(parse(cols[1])?);
        }
        Self::table(r, v)
    }

    pub fn profile(&self) -> &PotentialProfile {
        &self.profile
    }

    /// Support radius `b`.
    pub fn support(&self) -> f64 {
        match &self.profile {
            PotentialProfile::SquareWell { b, .. } | PotentialProfile::Shell { b, .. } => *b,
            PotentialProfile::Table(t) => t.x_max(),
        }
    }

    /// Unscaled, uncoupled value `V(r)`.
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        match &self.profile {
            PotentialProfile::SquareWell { v0, b } => {
                if r <= *b {
                    *v0
                } else {
                    0.0
                }
            }
            PotentialProfile::Shell { v0, r0, b } => {
                if r >= *r0 && r <= *b {
                    *v0
                } else {
                    0.0
                }
            }
            PotentialProfile::Table(t) => {
                if r > t.x_max() {
                    0.0
                } else if r < t.x_min() {
                    t.values()[0]
                } else {
                    t.eval(r).max(0.0)
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.profile {
            PotentialProfile::SquareWell { v0, .. } | PotentialProfile::Shell { v0, .. } => *v0 == 0.0,
            PotentialProfile::Table(t) => t.values().iter().all(|v| *v == 0.0),
        }
    }

    /// Radii in `[0, b]` where the profile may be non-smooth, including both
    /// endpoints. Integrators place a node on each.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.profile {
            PotentialProfile::SquareWell { b, .. } => vec![0.0, *b],
            PotentialProfile::Shell { r0, b, .. } => {
                if *r0 > 0.0 {
                    vec![0.0, *r0, *b]
                } else {
                    vec![0.0, *b]
                }
            }
            PotentialProfile::Table(t) => {
                if t.x_min() > 0.0 {
                    vec![0.0, t.x_min(), t.x_max()]
                } else {
                    vec![0.0, t.x_max()]
                }
            }
        }
    }

    /// The potential `N^2 V(N r)`, supported on `r <= b / N`.
    pub fn rescaled(&self, n: f64) -> Result<Self> {
        if !(n > 0.0) {
            return Err(Error::InvalidParameter(format!("scale must be > 0, got {n}")));
        }
        let n2 = n * n;
        match &self.profile {
            PotentialProfile::SquareWell { v0, b } => Self::square_well(v0 * n2, b / n),
            PotentialProfile::Shell { v0, r0, b } => Self::shell(v0 * n2, r0 / n, b / n),
            PotentialProfile::Table(t) => {
                let x = t.nodes().iter().map(|r| r / n).collect();
                let y = t.values().iter().map(|v| v * n2).collect();
                let d = t.slopes().iter().map(|d| d * n2 * n).collect();
                Ok(Self {
                    profile: PotentialProfile::Table(Arc::new(HermiteTable::new(x, y, d, 0.0)?)),
                })
            }
        }
    }
}

/// Dimensionless coupling `λ`, particle number `N` and the species pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub lambda: f64,
    pub n_particles: u64,
    pub pair: PairTag,
}

impl CouplingSpec {
    pub fn new(lambda: f64, n_particles: u64, pair: PairTag) -> Result<Self> {
        if !(lambda >= 1.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling lambda must be >= 1, got {lambda}")));
        }
        if n_particles < 1 {
            return Err(Error::InvalidParameter("particle number N must be >= 1".into()));
        }
        Ok(Self {
            lambda,
            n_particles,
            pair,
        })
    }

    pub fn n(&self) -> f64 {
        self.n_particles as f64
    }
}

/// Which power of `N` multiplies `λ V(N x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelScaling {
    /// `N^2 λ V(N x)`: the two-body interaction of the many-body Hamiltonian.
    TwoBody,
    /// `N^3 λ V(N x)`: the mean-field convolution kernel.
    MeanField,
}

pub fn eval_scaled(pot: &RadialPotential, c: &CouplingSpec, x: [f64; 3], scaling: KernelScaling) -> f64 {
    let n = c.n();
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let prefactor = match scaling {
        KernelScaling::TwoBody => n * n,
        KernelScaling::MeanField => n * n * n,
    };
    prefactor * c.lambda * pot.value(n * r)
}

/// `sin(x)/x` with a series branch near the origin.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Radial Fourier transform `ρ ↦ Û(ρ)` of a radial convolution kernel.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    kind: ProfileKind,
}

#[derive(Debug, Clone)]
enum ProfileKind {
    Zero,
    /// Contact kernel `c δ(x)`: `Û ≡ c`.
    Contact(f64),
    Radial {
        pot: RadialPotential,
        lambda: f64,
        n_scale: f64,
        weight: Option<Arc<HermiteTable>>,
    },
}

impl SpectralProfile {
    pub fn zero() -> Self {
        Self {
            kind: ProfileKind::Zero,
        }
    }

    /// The contact interaction `c δ(x)`, e.g. `c = 8π a` for the cubic system.
    pub fn contact(c: f64) -> Self {
        Self {
            kind: ProfileKind::Contact(c),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            ProfileKind::Zero => true,
            ProfileKind::Contact(c) => *c == 0.0,
            ProfileKind::Radial { pot, lambda, .. } => pot.is_zero() || *lambda == 0.0,
        }
    }

    /// Evaluates `Û(ρ)` at wavenumber magnitude `rho >= 0`.
    pub fn eval(&self, rho: f64) -> Result<f64> {
        match &self.kind {
            ProfileKind::Zero => Ok(0.0),
            ProfileKind::Contact(c) => Ok(*c),
            ProfileKind::Radial {
                pot,
                lambda,
                n_scale,
                weight,
            } => {
                if pot.is_zero() {
                    return Ok(0.0);
                }
                // substituting s = N r gives 4π ∫_0^b s^2 λ V(s) f(s) sinc(ρ s / N) ds
                let k = rho / n_scale;
                let integrand = |s: f64| {
                    let f = weight.as_ref().map_or(1.0, |w| w.eval(s));
                    s * s * pot.value(s) * f * sinc(k * s)
                };
                let mut breaks = pot.breakpoints();
                // the support edge of a discontinuous profile is evaluated
                // from the inside on every piece
                breaks.dedup();
                let opts = QuadOptions {
                    abs_tol: 1e-12 / (4.0 * PI * lambda),
                    rel_tol: 0.0,
                    max_panels: 4000,
                };
                let integral = integrate_pieces(integrand, &breaks, opts)?;
                Ok(4.0 * PI * lambda * integral)
            }
        }
    }
}

/// Transform of `N^3 λ V(N·) f(N·)`; `weight` is `f` in the unscaled radial
/// variable and must cover `[0, b]`. Without a weight, `f ≡ 1`.
pub fn radial_fourier(
    pot: &RadialPotential,
    c: &CouplingSpec,
    weight: Option<Arc<HermiteTable>>,
) -> Result<SpectralProfile> {
    if let Some(w) = &weight {
        if w.x_min() > 0.0 || w.x_max() < pot.support() {
            return Err(Error::InvalidParameter(format!(
                "weight table covers [{}, {}], needs [0, {}]",
                w.x_min(),
                w.x_max(),
                pot.support()
            )));
        }
    }
    Ok(SpectralProfile {
        kind: ProfileKind::Radial {
            pot: pot.clone(),
            lambda: c.lambda,
            n_scale: c.n(),
            weight,
        },
    })
}
