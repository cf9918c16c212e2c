use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The request exceeds the dense-storage or enumeration limits.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A quantity that must be real or normalized came out otherwise.
    #[error("numerical integrity violated: {0}")]
    NumericalIntegrity(String),

    /// The requested postselection outcome has (numerically) zero probability.
    #[error("postselection impossible: conditional norm {norm:e} below 1e-14")]
    PostselectionImpossible { norm: f64 },

    /// Threshold bisection found no sign change on the search interval.
    #[error("bisection failed: {0}")]
    Bisection(String),

    /// The LP backing the polytope membership test did not solve.
    #[error("linear program failed: {0}")]
    LinearProgram(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
