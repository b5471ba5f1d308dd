use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent arities, out-of-range parameters, missing solver inputs.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The instance itself is unusable: unknown or duplicate elements, missing weights.
    #[error("instance error: {0}")]
    Instance(String),

    #[error("enumeration budget exceeded: {required} items requested, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    /// No candidate solution reached the utility bar.
    #[error(
        "infeasible or threshold too high: best utility {best} is below the required {required}"
    )]
    Infeasible { required: f64, best: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("instance generation failed after {attempts} attempts: {reason}")]
    GenerationExhausted { attempts: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn instance(msg: impl Into<String>) -> Self {
        Error::Instance(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
