use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("integration produced non-finite values at t = {t:e} s (h = {h:e} s)")]
    NonFinite { t: f64, h: f64 },

    #[error("integration failed in pulse {pulse}: {source}")]
    PulseFailure {
        pulse: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "brute-force span of {span:e} s exceeds the {limit:e} s guard (pass the override flag to run anyway)"
    )]
    SpanGuard { span: f64, limit: f64 },

    #[error("state invariant violated at snapshot {pulse}: {what}")]
    Invariant { pulse: usize, what: String },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("unknown preset `{name}`; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error category, mapped onto process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Integration,
    Invariant,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Integration => 3,
            ErrorCategory::Invariant => 4,
            ErrorCategory::Io => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Integration => "integration",
            ErrorCategory::Invariant => "invariant",
            ErrorCategory::Io => "io",
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidParameter { .. }
            | Error::Parse(_)
            | Error::UnknownPreset { .. }
            | Error::SpanGuard { .. } => ErrorCategory::Config,
            Error::NonFinite { .. } | Error::PulseFailure { .. } => ErrorCategory::Integration,
            Error::Invariant { .. } => ErrorCategory::Invariant,
            Error::Io { .. } | Error::Csv { .. } => ErrorCategory::Io,
        }
    }

    /// Shorthand for [`Error::InvalidParameter`].
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
