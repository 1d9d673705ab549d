use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while parsing, evaluating or solving.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Syntax error in an expression source string.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// An identifier that is neither a variable, a constant nor a function.
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    /// Evaluation hit a point outside the mathematical domain of some
    /// subexpression (log of a non-positive number, division by zero, ...).
    /// Carries a rendering of the offending subexpression.
    #[error("domain error: {reason} while evaluating `{expr}`")]
    Domain { reason: String, expr: String },

    /// The point lies outside the region where the metric is defined.
    #[error("point ({x1}, {x2}) is outside the metric domain")]
    OutsideDomain { x1: f64, x2: f64 },

    /// The conformal factor must be strictly positive.
    #[error("conformal factor is not positive at ({x1}, {x2}): lambda = {lambda}")]
    NonPositiveFactor { x1: f64, x2: f64, lambda: f64 },

    /// A Lorentzian graph operation was asked at a point where the graph is
    /// not spacelike (or too close to lightlike to trust).
    #[error("graph is not spacelike at ({x1}, {x2}): 1 - |Du|^2 = {margin:e}")]
    NotSpacelike { x1: f64, x2: f64, margin: f64 },

    /// A 2x2 metric sample that is not positive definite.
    #[error("metric is not positive definite at ({x1}, {x2})")]
    NotPositiveDefinite { x1: f64, x2: f64 },

    /// Argument outside the range an operation accepts.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The Newton iteration stopped without meeting the tolerance.
    #[error("solver did not converge: {iterations} iterations, residual {residual:e}")]
    SolverDiverged { iterations: usize, residual: f64 },

    /// A linear solve failed (singular or numerically unusable matrix).
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// Scene file rejected during validation.
    #[error("invalid scene: {0}")]
    Scene(String),

    /// I/O failure, stringified to keep the error type clonable.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
