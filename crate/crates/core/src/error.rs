use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unstable trap: {0}")]
    UnstableTrap(String),

    #[error("linear crystal unstable: mode {mode} has eigenvalue {eigenvalue:.6e}")]
    LinearInstability { mode: usize, eigenvalue: f64 },

    #[error("no convergence in {what} after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("insufficient slices: need more than {required}, got {got}")]
    InsufficientSlices { required: usize, got: usize },

    #[error("insufficient Fourier terms: need 2*n_f > {required}, got n_f = {got}")]
    InsufficientTerms { required: usize, got: usize },

    #[error("closure system has an empty null space")]
    EmptyNullSpace,

    #[error("top eigenvalues degenerate: |l1| = {top:.6e}, |l2| = {second:.6e}")]
    DegenerateTopEigenvalue { top: f64, second: f64 },
}

impl Error {
    /// True for errors caused by bad inputs rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidInput(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
