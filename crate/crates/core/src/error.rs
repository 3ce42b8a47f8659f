use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: estimated error {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Quadrature { residual: f64, tolerance: f64 },

    #[error("integrator step underflow: smallest step {step:.3e}")]
    StepUnderflow { step: f64 },

    #[error("no sign change in eigenvalue bracket: mismatch({lo:.6e}) = {m_lo:.6e}, mismatch({hi:.6e}) = {m_hi:.6e}")]
    Bracket { lo: f64, hi: f64, m_lo: f64, m_hi: f64 },

    #[error("non-finite field values: {0}")]
    NonFinite(String),

    #[error("non-finite state after step {step}")]
    NonFiniteStep { step: usize },

    #[error("convolution left an imaginary residue {residue:.3e} (relative); profile is not radial or is corrupted")]
    ImaginaryResidue { residue: f64 },

    #[error("input not normalized: |norm - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("maximum iterations ({iterations}) exceeded, best energy {best_energy:.12e}")]
    MaxIterations {
        iterations: usize,
        best_energy: f64,
        best: Box<(Vec<num_complex::Complex64>, Vec<num_complex::Complex64>)>,
    },

    #[error("series did not converge after {terms} terms (tail {tail:.3e})")]
    SeriesDivergence { terms: usize, tail: f64 },

    #[error("coarse grid too large: {m}^3 points exceeds {limit}")]
    CoarseGridTooLarge { m: usize, limit: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter(_) | Error::InvalidPotential(_) => 2,
            Error::Io(_) | Error::Snapshot(_) | Error::Json(_) => 4,
            _ => 3,
        }
    }
}
