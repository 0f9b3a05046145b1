use std::path::PathBuf;

use serde::Serialize;

/// Everything the runner can fail with.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    /// A value parsed but violates an invariant. `line` points at the field
    /// when it could be located in the source text.
    #[error("{}{message}", location_prefix(path, *line))]
    Invalid { path: Option<PathBuf>, line: Option<usize>, message: String },
    #[error(transparent)]
    Model(#[from] wpt_core::Error),
    #[error("iteration stopped after {iterations} steps without meeting the tolerance")]
    NotConverged { iterations: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn location_prefix(path: &Option<PathBuf>, line: Option<usize>) -> String {
    match (path, line) {
        (Some(p), Some(l)) => format!("{}:{l}: ", p.display()),
        (Some(p), None) => format!("{}: ", p.display()),
        (None, Some(l)) => format!("line {l}: "),
        (None, None) => String::new(),
    }
}

impl AppError {
    pub fn invalid(message: impl Into<String>) -> Self {
        AppError::Invalid { path: None, line: None, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    /// Process exit status: 2 validation, 3 non-convergence, 4 grid refusal,
    /// 1 for IO and anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Parse { .. } | AppError::Invalid { .. } => 2,
            AppError::NotConverged { .. } => 3,
            AppError::Model(e) => match e {
                wpt_core::Error::NoConvergence { .. } => 3,
                wpt_core::Error::GridTooLarge { .. } => 4,
                _ => 2,
            },
            AppError::Io { .. } | AppError::Csv(_) | AppError::Json(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Io { .. } => "io",
            AppError::Parse { .. } => "parse",
            AppError::Invalid { .. } => "validation",
            AppError::NotConverged { .. } => "non_convergence",
            AppError::Model(wpt_core::Error::NoConvergence { .. }) => "non_convergence",
            AppError::Model(wpt_core::Error::GridTooLarge { .. }) => "grid_refused",
            AppError::Model(_) => "validation",
            AppError::Csv(_) | AppError::Json(_) => "output",
        }
    }

    /// Machine-readable form printed on failure.
    pub fn record(&self) -> ErrorRecord {
        let (line, column) = match self {
            AppError::Parse { line, column, .. } => (Some(*line), Some(*column)),
            AppError::Invalid { line, .. } => (*line, None),
            _ => (None, None),
        };
        ErrorRecord { kind: self.kind(), exit_code: self.exit_code(), message: self.to_string(), line, column }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

pub type AppResult<T> = std::result::Result<T, AppError>;
