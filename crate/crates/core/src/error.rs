use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid circuit constants: {0}")]
    InvalidConstants(String),

    #[error("unphysical parameters at phi_x={phi_x}: eta={eta}, E_Jq*={e_jq_star} GHz")]
    Unphysical { phi_x: f64, eta: f64, e_jq_star: f64 },

    #[error("non-finite flux phase {0}")]
    NonFinitePhase(f64),

    #[error("invalid drive: {0}")]
    InvalidDrive(String),

    #[error("empty time interval [{t0}, {t1}]")]
    EmptyInterval { t0: f64, t1: f64 },

    #[error("photon truncation n_max={0} must be at least 1")]
    Truncation(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("hermitian eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid evolution config: {0}")]
    InvalidConfig(String),

    #[error("method/drive mismatch: {0}")]
    MethodMismatch(String),

    #[error("initial state not normalized (|norm - 1| = {0:e})")]
    NotNormalized(f64),

    #[error("norm drift {drift:e} exceeds tolerance {tol:e} at t={t} ns")]
    NormDrift { t: f64, drift: f64, tol: f64 },

    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),

    #[error("sweep point f_s={f_s} GHz failed: {source}")]
    SweepPoint {
        f_s: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Innermost error, looking through sweep-point tagging.
    pub fn root(&self) -> &Error {
        match self {
            Error::SweepPoint { source, .. } => source.root(),
            other => other,
        }
    }
}
