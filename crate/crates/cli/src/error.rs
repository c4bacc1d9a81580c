use thiserror::Error;

/// Failure of a CLI run, split by exit code: `1` for anything that stops
/// the input from being read (usage, I/O, schema), `2` for well-formed input
/// that fails a physics check.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] ionet::Error),

    /// A check the command performs itself (e.g. the weak-loop criterion).
    #[error("{message}")]
    Physics { kind: &'static str, message: String },
}

impl CliError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Core(e) if e.is_schema_error() => 1,
            CliError::Core(_) | CliError::Physics { .. } => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Io { .. } => "Io",
            CliError::Core(e) => e.kind(),
            CliError::Physics { kind, .. } => kind,
        }
    }

    /// One-line JSON record for stderr.
    pub fn machine_readable(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;
