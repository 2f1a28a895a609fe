use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("no records match {0}")]
    NoRecords(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate segment: {0}")]
    DegenerateSegment(String),

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("regression design matrix is rank-deficient")]
    SingularRegression,

    #[error("optimizer did not converge after {iterations} iterations (best objective {best_objective})")]
    NonConvergence {
        iterations: usize,
        best_objective: f64,
        best_params: Vec<f64>,
    },

    #[error("estimated model is not stationary/invertible: {0}")]
    NonInvertible(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures caused by unreadable or malformed input or configuration,
    /// as opposed to numerical or statistical failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.root(),
            Error::MalformedRecord { .. } | Error::NoRecords(_) | Error::Config(_) | Error::Io(_)
        )
    }
}
