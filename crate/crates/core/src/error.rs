use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("automaton is not total: state `{state}` has no transition on letter `{letter}`")]
    NotTotal { state: String, letter: String },

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("unknown letter `{0}`")]
    UnknownLetter(String),

    #[error("invalid automaton: {0}")]
    Invalid(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("{operation} does not support value function `{valfn}`")]
    Unsupported { operation: String, valfn: String },

    #[error("{0} requires a deterministic automaton; determinize it first")]
    NonDeterministic(String),

    #[error("open problem: {0}")]
    OpenProblem(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("search budget exhausted (inconclusive): {0}")]
    BudgetExhausted(String),

    #[error("graph has a negative cycle through vertices {0:?}")]
    NegativeCycle(Vec<usize>),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
}

impl Error {
    pub(crate) fn unsupported(operation: &str, valfn: impl std::fmt::Display) -> Self {
        Error::Unsupported {
            operation: operation.to_string(),
            valfn: valfn.to_string(),
        }
    }

    /// True for errors caused by malformed or invalid input files.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::NotTotal { .. }
                | Error::UnknownState(_)
                | Error::UnknownLetter(_)
                | Error::Invalid(_)
                | Error::AlphabetMismatch(_)
        )
    }

    /// True for well-formed requests that the toolkit cannot answer
    /// (unsupported value function, open problems, missing determinism).
    pub fn is_unsupported(&self) -> bool {
        matches!(
            self,
            Error::Unsupported { .. } | Error::NonDeterministic(_) | Error::OpenProblem(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
