use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("malformed DIMACS input: {0}")]
    Dimacs(String),

    #[error("malformed solver output: {0}")]
    MalformedOutput(String),

    #[error("solver executable not found: {0}")]
    SolverNotFound(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("formula has {clauses} clauses, above the embedded solver cap of {cap}; configure an external solver")]
    FormulaTooLarge { clauses: usize, cap: usize },

    /// A decoded model violated an invariant the encoding is supposed to
    /// guarantee. Always a bug in an encoder or in the solver.
    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid_arg(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
