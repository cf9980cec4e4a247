use gaussian_calculus::CalcError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagError {
    #[error("time must be negative, got t = {0}")]
    NonNegativeTime(f64),
    #[error("trace too short: {0}")]
    TooShort(String),
    #[error("nonpositive value {value} at tau = {tau} in a fit window")]
    NonPositive { tau: f64, value: f64 },
    #[error("energy changes sign inside the window at tau = {0:?}")]
    MixedSign(Vec<f64>),
    #[error("trajectory has not converged: last increment {0:e}")]
    NotConverged(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error(transparent)]
    Exact(#[from] exact_solutions::ExactError),
}
