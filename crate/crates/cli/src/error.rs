use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Problem { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("missing section [{0}]")]
    Missing(String),
    #[error("line {line}: {source}")]
    Engine { line: usize, source: jetvar::Error },
    #[error(transparent)]
    Math(#[from] jetvar::Error),
}

impl CliError {
    pub fn problem(line: usize, message: impl Into<String>) -> Self {
        CliError::Problem {
            line,
            message: message.into(),
        }
    }

    pub fn at(line: usize, source: jetvar::Error) -> Self {
        CliError::Engine { line, source }
    }

    /// 2 for bad input, 3 for degenerate mathematics, 4 for failed internal
    /// verification.
    pub fn exit_code(&self) -> i32 {
        use jetvar::Error as E;
        let engine = |e: &E| match e {
            E::Singular(_) | E::DivisionByZero | E::NegativeRadicand => 3,
            E::Verification(_) => 4,
            _ => 2,
        };
        match self {
            CliError::Io { .. } | CliError::Problem { .. } | CliError::Invalid(_) | CliError::Missing(_) => 2,
            CliError::Engine { source, .. } => engine(source),
            CliError::Math(e) => engine(e),
        }
    }
}
