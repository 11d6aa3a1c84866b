//! CLI error classification and exit codes.

use std::fmt;

/// Exit classes: 2 config, 3 data, 4 numerical.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn in_stage(self, stage: &str) -> CliError {
        let wrap = |m: String| format!("stage {stage} failed: {m}");
        match self {
            CliError::Config(m) => CliError::Config(wrap(m)),
            CliError::Data(m) => CliError::Data(wrap(m)),
            CliError::Numerical(m) => CliError::Numerical(wrap(m)),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<periodica::Error> for CliError {
    fn from(e: periodica::Error) -> Self {
        use periodica::Error as E;
        match e {
            E::InvalidParam(_) => CliError::Config(e.to_string()),
            E::SingularCovariance
            | E::NegativeVariance(_)
            | E::ReplicateFailed { .. }
            | E::FilterGap(_)
            | E::ConstantInput => CliError::Numerical(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
