use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Conditions that the certificate and blow-up machinery treat as outcomes
/// (failed hypotheses, non-positive initial functional, detected divergence)
/// are reported through status enums instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported grid: {0}")]
    UnsupportedGrid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-finite capacity: {0}")]
    NonFiniteCapacity(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("expression parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("quadrature did not converge on [{a}, {b}] (estimate {estimate:e}, error {error:e})")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },

    #[error("memory budget of {budget} retained steps exceeded")]
    MemoryBudget { budget: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
