use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KdeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid bandwidth {0}: must be finite and strictly positive")]
    InvalidBandwidth(f64),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    #[error("{} observation(s) outside the bin range: {values:?}", values.len())]
    OutOfRange { values: Vec<f64> },

    #[error("degenerate bandwidth at x = {x}: {reason}")]
    DegenerateBandwidth { x: f64, reason: String },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("criterion is non-finite at every candidate bandwidth")]
    CriterionFailure,

    #[error("plug-in failure: {0}")]
    PluginFailure(String),

    #[error("invalid ICV kernel parameters: {0}")]
    InvalidIcvParams(String),
}

impl KdeError {
    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            KdeError::InvalidArgument(_) => "invalid-argument",
            KdeError::InvalidBandwidth(_) => "invalid-bandwidth",
            KdeError::Unsupported(_) => "unsupported-operation",
            KdeError::NumericOverflow(_) => "numeric-overflow",
            KdeError::OutOfRange { .. } => "out-of-range",
            KdeError::DegenerateBandwidth { .. } => "degenerate-bandwidth",
            KdeError::DegenerateSample(_) => "degenerate-sample",
            KdeError::DomainViolation(_) => "domain-violation",
            KdeError::CriterionFailure => "criterion-failure",
            KdeError::PluginFailure(_) => "plugin-failure",
            KdeError::InvalidIcvParams(_) => "invalid-icv-params",
        }
    }
}

pub type Result<T> = std::result::Result<T, KdeError>;
