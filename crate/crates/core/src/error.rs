use thiserror::Error;

use crate::game::Perm3;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("label {0} appears on both sides of a tensor product")]
    LabelCollision(String),
    #[error("label {0} is not part of the operator layout")]
    UnknownLabel(String),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("outcome distribution for {order} is not normalized (sum {sum})")]
    NotADistribution { order: Perm3, sum: f64 },
    #[error("excitation count {k} out of range for {n} qubits")]
    InvalidExcitation { n: usize, k: usize },
    #[error("outputs for {first} and {second} are not orthogonal: tr(M'^T M sigma) = {value}")]
    NotOrthogonal { first: Perm3, second: Perm3, value: String },
    #[error("malformed cone program: {0}")]
    ProblemMalformed(String),
    #[error("solver failed ({status}): primal residual {primal_residual:e}, dual residual {dual_residual:e}")]
    SolverFailed {
        status: String,
        primal_residual: f64,
        dual_residual: f64,
    },
    #[error("tableau parse error on line {line}: {message}")]
    Tableau { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
