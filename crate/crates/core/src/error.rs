use thiserror::Error;

pub type Result<T, E = QcError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcError {
    #[error("chain of {n} atoms is too short for cutoff {cutoff} (need at least {min})")]
    ChainTooShort { n: usize, cutoff: usize, min: usize },

    #[error("moment tests need at least {min} atoms for stencil reach {reach}, chain has {n}")]
    MomentRange { n: usize, reach: usize, min: usize },

    #[error("field length {got} does not match chain size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("difference range r={r} must satisfy 1 <= r <= N/2 = {half}")]
    DifferenceRange { r: usize, half: usize },

    #[error("difference order must be 1 or 2, got {0}")]
    DifferenceOrder(u8),

    #[error("norm order p={0} is below 1")]
    NormOrder(f64),

    #[error("potential argument {0} is outside the admissible domain")]
    PotentialDomain(f64),

    #[error("derivative order must be 0, 1 or 2, got {0}")]
    DerivativeOrder(u8),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("interface collars overlap: {needed} atoms required, chain has {n}")]
    CollarOverlap { n: usize, needed: usize },

    #[error("model {0} requires a region partition")]
    MissingPartition(&'static str),

    #[error("model {0} does not derive from an energy")]
    NoEnergy(&'static str),

    #[error("coupled models are restricted to cutoff 2, got {0}")]
    CouplingCutoff(usize),

    #[error("interface stencil is {got}x{got}, partition expects {expected}x{expected}")]
    StencilSize { expected: usize, got: usize },

    #[error("interface stencil is not symmetric at ({0}, {1})")]
    StencilAsymmetric(usize, usize),

    #[error("operator is not shift-invariant (row {row} sums to {sum})")]
    NotShiftInvariant { row: usize, sum: f64 },

    #[error("operator carries a nonzero ghost force (sup {0})")]
    NonzeroGhost(f64),

    #[error("operators live on chains of different sizes ({0} vs {1})")]
    ChainMismatch(usize, usize),

    #[error("interface width m must be at least 1")]
    InterfaceWidth,

    #[error("linear system is rank deficient beyond the constant kernel ({0})")]
    RankDeficient(String),

    #[error("equilibrium residual {residual:e} exceeds tolerance {tolerance:e}")]
    SolveResidual { residual: f64, tolerance: f64 },

    #[error("certificate weights do not cancel: {0}")]
    CertificateCancellation(String),

    #[error("slope fit needs at least two points, got {0}")]
    TooFewPoints(usize),

    #[error("slope fit requires positive data, got ({0}, {1})")]
    NonPositiveData(f64, f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl QcError {
    /// Process exit code: 2 for configuration faults, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            QcError::RankDeficient(_)
            | QcError::SolveResidual { .. }
            | QcError::CertificateCancellation(_) => 3,
            QcError::Io(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for QcError {
    fn from(e: std::io::Error) -> Self {
        QcError::Io(e.to_string())
    }
}
