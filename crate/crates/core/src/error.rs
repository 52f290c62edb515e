use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("level index {0} outside 1..=5")]
    InvalidLevel(u8),

    #[error("invalid coupling topology: {0}")]
    InvalidTopology(String),

    #[error("coupling graph contains a cycle; closed-loop phase conditions are unsupported")]
    CyclicTopology,

    #[error("validation error in `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid decay channel {source_level}->{target}: source must be excited and target ground")]
    InvalidChannel { source_level: u8, target: u8 },

    #[error("DegenerateSteadyState: nullspace is not one-dimensional (second-smallest singular value {gap:.3e}){}",
        .ramp_time.map(|t| format!(" at ramp time {t}")).unwrap_or_default())]
    DegenerateSteadyState { gap: f64, ramp_time: Option<f64> },

    #[error("SingularSolve: trace-constrained steady-state system is numerically singular")]
    SingularSolve,

    #[error("StepFailure: {0}")]
    StepFailure(String),

    #[error("AmbiguousTracking at sweep point {point}: best overlap {overlap:.4} < 1/sqrt(2); refine the sweep grid near this point")]
    AmbiguousTracking { point: usize, overlap: f64 },

    #[error("ParseError: {0}")]
    Parse(String),

    #[error("UnknownKey: `{0}`")]
    UnknownKey(String),

    #[error("IoError at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit status for the command-line front end. The table is part
    /// of the public interface and is repeated in `--help` and the README.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 3,
            Error::UnknownKey(_) => 4,
            Error::Validation { .. }
            | Error::InvalidLevel(_)
            | Error::InvalidTopology(_)
            | Error::InvalidState(_)
            | Error::InvalidChannel { .. } => 5,
            Error::CyclicTopology => 6,
            Error::DegenerateSteadyState { .. } => 7,
            Error::SingularSolve => 8,
            Error::StepFailure(_) => 9,
            Error::AmbiguousTracking { .. } => 10,
            Error::Io { .. } => 11,
        }
    }
}
