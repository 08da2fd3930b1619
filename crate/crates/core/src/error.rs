use thiserror::Error;

/// Errors produced by the analysis pipeline.
///
/// Variants split into precondition failures (bad input, capacity, resolution)
/// and resource failures (point budget, eigensolver); see [`Error::is_resource`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid capacity exceeded: {0}")]
    Capacity(String),

    #[error("nyquist guard violated: 1/(2*step) = {available} < required {required}")]
    Nyquist { available: f64, required: f64 },

    #[error("singular lattice matrix (|det| = {0:e})")]
    Singular(f64),

    #[error("lattice point budget exceeded: {needed} points > budget {budget}")]
    Budget { needed: usize, budget: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

    #[error("support overflow: {0}")]
    SupportOverflow(String),

    #[error("signal has no analytic form; {0} would require interpolation")]
    NotAnalytic(&'static str),

    #[error("window components are not orthonormal (max Gram defect {0:e})")]
    NotOrthonormal(f64),

    #[error("matrix norm {norm} exceeds constant {constant}: outside guarantee region")]
    OutsideGuarantee { norm: f64, constant: f64 },

    #[error("radius {radius} is below the field resolution {step}")]
    Resolution { radius: f64, step: f64 },

    #[error("field does not decay at the region boundary (relative edge magnitude {0:e})")]
    InsufficientDecay(f64),

    #[error("insufficient usable records: {found} < {needed}")]
    InsufficientRecords { found: usize, needed: usize },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("grid failure: {0}")]
    GridFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Budget and convergence failures, as opposed to precondition violations.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Budget { .. } | Error::Eigen(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
