use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown agent {0}")]
    UnknownAgent(String),

    #[error("statistic undefined: {0}")]
    UndefinedStatistic(String),

    #[error("insufficient sample for group {group}: need at least 2 records, got {n}")]
    InsufficientSample { group: String, n: usize },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error(
        "power iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    Convergence {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    #[error("continued fraction did not converge for I_x(a={a}, b={b}) at x={x}")]
    SpecialFunction { a: f64, b: f64, x: f64 },

    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: {} malformed row(s), first at line {}: {}", .errors.len(), .errors[0].line, .errors[0].message)]
    RowErrors {
        path: PathBuf,
        errors: Vec<RowError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// A row-level defect in an input file.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RowError {
    /// 1-based line number in the source file (the header is line 1).
    pub line: u64,
    pub message: String,
}

impl Error {
    /// Process exit code for the command-line front end.
    ///
    /// `1` input error, `2` configuration error, `3` internal or convergence error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::UnknownAgent(_)
            | Error::MissingColumn { .. }
            | Error::RowErrors { .. }
            | Error::Io { .. }
            | Error::Csv { .. }
            | Error::InsufficientSample { .. }
            | Error::DegenerateVariance(_)
            | Error::UndefinedStatistic(_) => 1,
            Error::Config(_) => 2,
            Error::Convergence { .. } | Error::SpecialFunction { .. } | Error::Json(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
