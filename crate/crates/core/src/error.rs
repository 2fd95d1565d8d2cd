use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid subsystem index {index} (system has {count} subsystems)")]
    InvalidIndex { index: usize, count: usize },

    #[error("no null vector within tolerance (smallest relative pivot {0:e})")]
    SingularStructure(f64),

    #[error("steady state is not unique: null space has dimension {0}")]
    AmbiguousSteadyState(usize),

    #[error("problem too large: {entries} superoperator entries exceeds limit {limit}")]
    Size { entries: usize, limit: usize },

    #[error("Fock truncation too small: top-level population {0:e}")]
    Truncation(f64),

    #[error("resolvent ill-conditioned at the probe frequency (relative pivot {0:e})")]
    Conditioning(f64),

    #[error("polarization undefined: both circular amplitudes vanish")]
    UndefinedPolarization,

    #[error("outside weak-field validity: {0}")]
    Validity(String),

    #[error("wrong basis: expected {expected}, found {found}")]
    Basis { expected: &'static str, found: &'static str },

    #[error("phase undefined: coherence magnitude {0:e}")]
    UndefinedPhase(f64),

    #[error("slope {0} deg/photon cannot be inverted to a conditional phase")]
    NonInvertibleSlope(f64),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
