use flipline::FliplineError;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid config: {}", violations.join("; "))]
    Validation { violations: Vec<String> },

    #[error(transparent)]
    Compute(#[from] FliplineError),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("environment: {0}")]
    Environment(String),

    #[error("table {table}: {message}")]
    Table { table: String, message: String },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "ParseError",
            CliError::Validation { .. } => "ValidationError",
            CliError::Compute(e) => e.kind(),
            CliError::Io { .. } => "IoError",
            CliError::Environment(_) => "EnvironmentError",
            CliError::Table { .. } => "TableError",
        }
    }

    /// Machine-readable record written to standard error.
    pub fn record(&self) -> serde_json::Value {
        let mut rec = json!({ "error": self.kind(), "message": self.to_string() });
        match self {
            CliError::Parse { line, column, .. } => {
                rec["line"] = json!(line);
                rec["column"] = json!(column);
            }
            CliError::Validation { violations } => rec["violations"] = json!(violations),
            _ => {}
        }
        rec
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } | CliError::Environment(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}
