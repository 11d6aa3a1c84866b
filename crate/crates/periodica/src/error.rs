use chrono::NaiveDate;
use thiserror::Error;

/// Errors raised by the periodica library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("csv error in row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("missing column '{0}' in csv header")]
    MissingColumn(String),

    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),

    #[error("gap at {0}")]
    DateGap(NaiveDate),

    #[error("non-daily spacing at {0}")]
    NonDailySpacing(NaiveDate),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("series already has missing entries")]
    AlreadyMissing,

    #[error("series is empty or entirely missing")]
    EmptySeries,

    #[error("series too short: need more than {need} points, got {got}")]
    SeriesTooShort { need: usize, got: usize },

    #[error("filtered component is undefined at index {0} (gap wider than filter support)")]
    FilterGap(usize),

    #[error("smoothing input has missing entries (smoothers run post-imputation)")]
    IncompleteInput,

    #[error("singular covariance")]
    SingularCovariance,

    #[error("negative conditional variance {0}")]
    NegativeVariance(f64),

    #[error("imputation replicate {replicate} failed after {attempts} attempts: {cause}")]
    ReplicateFailed {
        replicate: usize,
        attempts: usize,
        cause: String,
    },

    #[error("undefined correlation for constant input")]
    ConstantInput,

    #[error("evaluation inputs disagree: {0}")]
    EvalMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
