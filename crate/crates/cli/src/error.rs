use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const DATA: i32 = 3;
    pub const NUMERIC: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid config:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<crate::config::Diagnostic>),
    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: drfs::Error,
    },
    #[error("gradient check failed: max relative error {0:.3e}")]
    Gradcheck(f64),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn stage(stage: &'static str) -> impl FnOnce(drfs::Error) -> CliError {
        move |source| CliError::Stage { stage, source }
    }

    pub fn exit_code(&self) -> i32 {
        use drfs::Error as E;
        match self {
            CliError::Syntax { .. } | CliError::Config(_) | CliError::Invalid(_) => exit::CONFIG,
            CliError::Stage { source, .. } => match source {
                E::InvalidArgument(_) => exit::CONFIG,
                E::Schema(_)
                | E::Ingestion { .. }
                | E::InvalidData(_)
                | E::DimensionMismatch { .. }
                | E::Csv(_) => exit::DATA,
                E::Numerical(_) => exit::NUMERIC,
                _ => exit::OTHER,
            },
            CliError::Gradcheck(_) => exit::NUMERIC,
            CliError::Io(_) | CliError::Json(_) => exit::OTHER,
        }
    }
}
