use thiserror::Error;

use crate::select::SelectionTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("eigendecomposition of order {order} did not converge (off-diagonal residual {residual:e})")]
    NoConvergence { order: usize, residual: f64 },

    #[error("zero matrix has no pseudoinverse power")]
    ZeroPseudoInverse,

    #[error("singular rank-one update: denominator {denominator:e} is too close to zero")]
    SingularUpdate { denominator: f64 },

    #[error("evaluation point {x} coincides with eigenvalue {eigenvalue}")]
    Pole { x: f64, eigenvalue: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vector family is not isotropic (max deviation from identity {deviation:e})")]
    NotIsotropic { deviation: f64 },

    #[error("barrier violated: {0}")]
    BarrierViolation(String),

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    ContractViolation(String),

    #[error("no feasible vector at step {step}: no index satisfies L_A(v) >= U_A(v) > 0")]
    Infeasible {
        step: usize,
        trace: Box<SelectionTrace>,
    },

    #[error("graph is disconnected ({components} components); run on each connected component separately")]
    Disconnected { components: usize },

    #[error("vertex sets overlap at vertex {0}")]
    OverlappingSets(usize),

    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
