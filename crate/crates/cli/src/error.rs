use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error in {file} at line {line}, column {column}: {message}")]
    Parse {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("compute error in {context}: {source}")]
    Compute {
        context: String,
        #[source]
        source: opalg_core::Error,
    },
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Validation(_) => 3,
            CliError::Compute { .. } => 4,
            CliError::Io { .. } => 5,
        }
    }

    pub(crate) fn parse(file: &str, e: serde_json::Error) -> Self {
        CliError::Parse {
            file: file.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a module context to core errors.
pub(crate) trait Context<T> {
    fn ctx(self, context: &str) -> CliResult<T>;
}

impl<T> Context<T> for opalg_core::Result<T> {
    fn ctx(self, context: &str) -> CliResult<T> {
        self.map_err(|source| CliError::Compute {
            context: context.to_string(),
            source,
        })
    }
}
