use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(
        "slot width {delta_m} does not divide the {outcomes} outcomes; nearest valid widths: {}",
        format_widths(*below, *above)
    )]
    NonDivisorSlotWidth {
        delta_m: usize,
        outcomes: usize,
        below: usize,
        above: Option<usize>,
    },

    #[error("histograms were built on different slot partitions")]
    PartitionMismatch,

    #[error("matrix exponential oracle refuses dimension {dim} (cap {cap})")]
    OracleTooLarge { dim: usize, cap: usize },

    #[error("branch probability {prob:e} is below the threshold {eps:e}")]
    ZeroProbabilityBranch { prob: f64, eps: f64 },

    #[error("rotation backends disagree by {diff:e} (tolerance {tol:e})")]
    BackendDisagreement { diff: f64, tol: f64 },

    #[error("tridiagonal eigensolver did not converge")]
    NoConvergence,

    #[error("rejection sampler acceptance rate {rate:e} is below 1e-4; refine the envelope grid")]
    LowAcceptance { rate: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_widths(below: usize, above: Option<usize>) -> String {
    match above {
        Some(a) if a != below => format!("{below} or {a}"),
        _ => below.to_string(),
    }
}

impl Error {
    /// Process exit code for the CLI: 2 for usage errors, 3 for numerical
    /// failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidState(_)
            | Error::NonDivisorSlotWidth { .. }
            | Error::PartitionMismatch
            | Error::OracleTooLarge { .. } => 2,
            Error::ZeroProbabilityBranch { .. }
            | Error::BackendDisagreement { .. }
            | Error::NoConvergence
            | Error::LowAcceptance { .. }
            | Error::Numerical(_) => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
