use std::path::PathBuf;

/// Process exit codes of the `tktp` binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Usage = 1,
    Data = 2,
    Internal = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("{path}, row {row}: {message}")]
    Row { path: PathBuf, row: usize, message: String },
    #[error(transparent)]
    Core(#[from] tktp_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Internal(String),
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;

impl AppError {
    pub fn data(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        AppError::Data { path: path.into(), message: message.into() }
    }

    pub fn row(path: impl Into<PathBuf>, row: usize, message: impl Into<String>) -> Self {
        AppError::Row { path: path.into(), row, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> ExitCode {
        use tktp_core::Error as E;
        match self {
            AppError::Usage(_) => ExitCode::Usage,
            AppError::Core(E::InvalidArgument(_) | E::UnknownSeries(_)) => ExitCode::Usage,
            AppError::Data { .. } | AppError::Row { .. } | AppError::Core(_) | AppError::Io { .. } => ExitCode::Data,
            AppError::Internal(_) => ExitCode::Internal,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            ExitCode::Ok => "ok",
            ExitCode::Usage => "usage",
            ExitCode::Data => "data",
            ExitCode::Internal => "internal",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "error": self.kind(),
            "code": self.exit_code() as i32,
            "message": self.to_string(),
        })
    }
}
