use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inconsistent shapes, counts or parameters supplied by the caller.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("symbol is not of Dirac type: Clifford relation fails for pair ({i}, {j}) with deviation {deviation:.3e}")]
    NotDiracType { i: usize, j: usize, deviation: f64 },

    #[error("conormal symbol is singular (smallest singular value {min_sv:.3e}); the conormal direction is not elliptic")]
    SingularConormal { min_sv: f64 },

    #[error("covector is not tangential: xi(T) = {0:.3e}")]
    NotTangential(f64),

    #[error("boundary operator is not invertible on the imaginary axis: mode {mode} has eigenvalue {re:+.3e}{im:+.3e}i; shift it first")]
    NotInvertible { mode: i64, re: f64, im: f64 },

    #[error("matrix is not self-adjoint (deviation {0:.3e})")]
    NotSelfAdjoint(f64),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
