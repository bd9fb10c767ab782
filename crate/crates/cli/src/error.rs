use std::path::PathBuf;

use ala_core::Error as EngineError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}:{line}: {msg}", file.display())]
    Parse { file: PathBuf, line: u64, msg: String },

    #[error("{}: column `{name}` not found", file.display())]
    MissingColumn { file: PathBuf, name: String },

    #[error("cyclic group constraints: {}", cycle.join(" -> "))]
    Cycle { cycle: Vec<String> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Engine(#[from] EngineError),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn parse(file: impl Into<PathBuf>, line: u64, msg: impl Into<String>) -> Self {
        CliError::Parse { file: file.into(), line, msg: msg.into() }
    }

    /// Process exit code. Usage errors exit with 2 (clap); engine errors get
    /// one code per variant from 10 upwards.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Parse { .. } => 4,
            CliError::MissingColumn { .. } => 5,
            CliError::Cycle { .. } => 6,
            CliError::Config(_) => 7,
            CliError::Engine(e) => match e {
                EngineError::CyclicConstraints { .. } => 6,
                EngineError::NotInvertible { .. } => 10,
                EngineError::NotConcaveAtExpansion => 11,
                EngineError::NotConcave => 12,
                EngineError::NonPositiveDispersion { .. } => 13,
                EngineError::DegenerateResponse(_) => 14,
                EngineError::NonFiniteResponse { .. } => 15,
                EngineError::InvalidModel { .. } => 16,
                EngineError::RefuseEnumeration { .. } => 17,
                EngineError::NoConvergence { .. } => 18,
                EngineError::NonFiniteStep { .. } => 19,
                EngineError::ToleranceNotMet { .. } => 20,
                EngineError::Domain(_) => 21,
                EngineError::Dimension(_) => 22,
                EngineError::Unsupported(_) => 23,
            },
        }
    }
}
