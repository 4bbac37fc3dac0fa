use gibbslab_core::GibbsError;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Parse { path: String, line: usize, column: usize, message: String },
    Validation(Vec<String>),
    Core(GibbsError),
    Io(String),
}

impl From<GibbsError> for CliError {
    fn from(e: GibbsError) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse { path, line, column, message } => {
                write!(f, "{path}:{line}:{column}: {message}")
            }
            CliError::Validation(problems) => write!(f, "validation failed: {}", problems.join("; ")),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "ParseError",
            CliError::Validation(_) => "ValidationError",
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "IoError",
        }
    }

    /// Machine-readable error envelope.
    pub fn envelope(&self) -> Value {
        let details = match self {
            CliError::Parse { path, line, column, .. } => json!({ "path": path, "line": line, "column": column }),
            CliError::Validation(problems) => json!({ "violations": problems }),
            CliError::Core(e) => serde_json::to_value(e).unwrap_or(Value::Null),
            CliError::Io(_) => Value::Null,
        };
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
                "details": details,
            }
        })
    }
}
