use thiserror::Error;

use crate::symbolic::{EvalError, ParseError, VarRef};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("expected a point in {expected}, got {found}")]
    ChartMismatch { expected: String, found: String },
    #[error("expected {expected} values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} is not a jet coordinate")]
    NonJetVariable(VarRef),
    #[error("{var} exceeds the order bound {bound}")]
    LevelExceedsBound { var: VarRef, bound: u32 },
    #[error("unsupported curve basis element {0:?}")]
    UnsupportedBasis(String),
    #[error("singular Lagrangian: {0}")]
    SingularLagrangian(String),
    #[error(
        "Legendre inversion did not converge after {iterations} iterations (residual {residual:e})"
    )]
    InversionFailed { iterations: usize, residual: f64 },
    #[error("not a kth-order Hamiltonian: {0}")]
    NotKthOrder(String),
    #[error("irregular: {0}")]
    Irregular(String),
    #[error("not projectable: d/d{var} of theta(X_H) - H is {partial}")]
    NotProjectable { var: VarRef, partial: String },
    #[error("singular Hessian (det {det:e}) at t = {time}")]
    SingularHessian { time: f64, det: f64 },
    #[error("non-finite state after t = {last_good}")]
    NonFinite { last_good: f64 },
    #[error("invalid integration interval: {0}")]
    InvalidInterval(String),
}
