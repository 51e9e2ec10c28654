use thiserror::Error;

/// Errors raised by the wavezar numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid boundary partition: {0}")]
    InvalidPartition(String),

    #[error("mesh needs at least 3 nodes per axis, got {got} on axis {axis}")]
    TooFewNodes { axis: usize, got: usize },

    #[error("invalid damping: {0}")]
    InvalidDamping(String),

    #[error("damping coefficient does not satisfy a(x) >= a_0 > 0 on the control region")]
    DampingAssumptionViolated,

    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    #[error("truncation level must be >= 1, got {0}")]
    InvalidTruncationLevel(u32),

    #[error("operator has no free degrees of freedom")]
    NoFreeNodes,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dense materialization refused: {n_dof} degrees of freedom exceeds the cap of {cap}")]
    DenseCapExceeded { n_dof: usize, cap: usize },

    #[error("stiffness matrix is not positive definite (no Dirichlet constraint?)")]
    SingularStiffness,

    #[error("time step {dt} exceeds the stability limit {limit}")]
    TimeStepTooLarge { dt: f64, limit: f64 },

    #[error("non-finite state detected at t = {time}")]
    BlowUp { time: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("initial energy is zero")]
    ZeroInitialEnergy,

    #[error("decay fit needs at least 4 samples in the window, got {0}")]
    TooFewSamples(usize),

    #[error("nonpositive energy {value} at t = {time} inside the fit window")]
    NonPositiveEnergy { time: f64, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
