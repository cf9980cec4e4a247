use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("boundary iteration stalled at tau = {tau}: residual {residual:e} after {iterations} sweeps")]
    NotConverged {
        tau: f64,
        iterations: usize,
        residual: f64,
    },
    #[error("non-finite value in the solution at tau = {0}")]
    NonFinite(f64),
    #[error("field grid does not match the solver grid")]
    GridMismatch,
    #[error(transparent)]
    Linalg(#[from] banded_linalg::LinalgError),
    #[error(transparent)]
    Calc(#[from] gaussian_calculus::CalcError),
    #[error(transparent)]
    Diag(#[from] weiss_diagnostics::DiagError),
    #[error(transparent)]
    Exact(#[from] exact_solutions::ExactError),
    #[error(transparent)]
    Conformal(#[from] conformal_transform::ConformalError),
}
