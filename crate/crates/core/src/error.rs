use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("weight evaluated on a singular feature at {point:?}")]
    SingularEvaluation { point: Vec<f64> },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("oracle accuracy not reached after level {level}: best {best:e}, estimate {estimate:e}")]
    AccuracyNotReached { best: f64, estimate: f64, level: usize },

    #[error("degenerate basis at multi-index {index:?} (relative norm {ratio:e})")]
    DegenerateBasis { index: Vec<u32>, ratio: f64 },

    #[error("inconsistent expansion: Parseval radicand {radicand:e} is negative beyond tolerance")]
    InconsistentExpansion { radicand: f64 },

    #[error("decay fit undefined: {0}")]
    FitUndefined(String),

    #[error("cannot derive comparison constant: {0}")]
    CannotDeriveConstant(String),

    #[error("singular system: pivot {pivot:e} below threshold relative to norm {norm:e}")]
    SingularSystem { pivot: f64, norm: f64 },

    #[error("rule construction failed: lambda {lambda:e}, exactness residual {residual:e}")]
    RuleConstructionFailed { lambda: f64, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that stem from numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularEvaluation { .. }
                | Error::AccuracyNotReached { .. }
                | Error::DegenerateBasis { .. }
                | Error::InconsistentExpansion { .. }
                | Error::FitUndefined(_)
                | Error::SingularSystem { .. }
                | Error::RuleConstructionFailed { .. }
                | Error::InvalidWeight(_)
        )
    }
}
