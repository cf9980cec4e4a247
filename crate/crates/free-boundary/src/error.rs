use thiserror::Error;

#[derive(Debug, Error)]
pub enum FbError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no data at x = {x:?}, t = {t}")]
    OutsideData { x: Vec<f64>, t: f64 },
    #[error("radius {r} reaches before the start of the data")]
    RadiusOutOfRange { r: f64 },
    #[error("center {x:?}, t = {t} is not on the free boundary")]
    OffFreeBoundary { x: Vec<f64>, t: f64 },
    #[error("contact set is not a graph in {} columns", .0.len())]
    NonGraphical(Vec<(f64, f64)>),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error(transparent)]
    Calc(#[from] gaussian_calculus::CalcError),
    #[error(transparent)]
    Exact(#[from] exact_solutions::ExactError),
    #[error(transparent)]
    Conformal(#[from] conformal_transform::ConformalError),
    #[error(transparent)]
    Diag(#[from] weiss_diagnostics::DiagError),
    #[error(transparent)]
    Solver(#[from] signorini_solver::SolverError),
}
