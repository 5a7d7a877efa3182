// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("invariant violated at step {step}: {field}: {rule}")]
    InvariantViolation {
        step: usize,
        field: String,
        rule: String,
    },

    #[error("unsupported trace format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing field `{field}` at step {step}")]
    MissingField { step: usize, field: &'static str },

    #[error("length mismatch at step {step}: {what} ({left} vs {right})")]
    LengthMismatch {
        step: usize,
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("labels are degenerate: every label is {0}")]
    DegenerateLabels(bool),

    #[error("load index is constant; correlation undefined")]
    ConstantCli,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("need at least {needed} traces, got {got}")]
    TooFewTraces { needed: usize, got: usize },

    #[error("no intervention declared for tier {0}")]
    NoInterventionForTier(String),

    #[error("unknown generator parameter `{0}`")]
    UnknownParameter(String),

    #[error("value {value} for {what} outside [0, 1]")]
    Range { what: String, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// Attaches a step index to errors raised by per-step operations.
    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            Error::MissingField { field, .. } => Error::MissingField { step, field },
            Error::LengthMismatch {
                what, left, right, ..
            } => Error::LengthMismatch {
                step,
                what,
                left,
                right,
            },
            other => other,
        }
    }
}
