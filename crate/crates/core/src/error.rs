use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("weights sum to {sum}, not 1")]
    NotSimplex { sum: f64 },
    #[error("matrix is not irreducible")]
    NotIrreducible,
    #[error("1x1 matrix with zero entry has no positive Perron root")]
    ZeroMatrix,
    #[error("power iteration did not close the bracket within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("vector has no weight on action {index}")]
    NotFullSupport { index: usize },
    #[error("collision probability is zero")]
    ZeroCollisionProbability,
    #[error("strategy tree has depth {available}, but {required} rounds were requested")]
    InsufficientDepth { required: usize, available: usize },
    #[error("payoff at the candidate pair is not finite and positive")]
    InfinitePayoff,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("column {column} of the cost matrix is all zero")]
    ZeroColumn { column: usize },
    #[error("comet tail weight underflowed at vertex {vertex}")]
    TailUnderflow { vertex: usize },
    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("at least {required} actions are needed, got {found}")]
    TooFewActions { required: usize, found: usize },
    #[error("scripted agent chose action {action} outside 0..{n}")]
    ScriptedActionOutOfRange { action: usize, n: usize },
    #[error("numerical self-check failed: {0}")]
    NumericalCheck(String),
}

impl Error {
    /// Input problems are the caller's to fix; everything else is a numerical failure.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::TailUnderflow { .. } | Error::NumericalCheck(_)
        )
    }

    /// Stable machine-readable code for reports and HTTP payloads.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::InvalidInput(_) => "InvalidInput",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotSimplex { .. } => "NotSimplex",
            Error::NotIrreducible => "NotIrreducible",
            Error::ZeroMatrix => "ZeroMatrix",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NotFullSupport { .. } => "NotFullSupport",
            Error::ZeroCollisionProbability => "ZeroCollisionProbability",
            Error::InsufficientDepth { .. } => "InsufficientDepth",
            Error::InfinitePayoff => "InfinitePayoff",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::ZeroColumn { .. } => "ZeroColumn",
            Error::TailUnderflow { .. } => "TailUnderflow",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::TooFewActions { .. } => "TooFewActions",
            Error::ScriptedActionOutOfRange { .. } => "ScriptedActionOutOfRange",
            Error::NumericalCheck(_) => "NumericalCheck",
        }
    }
}
