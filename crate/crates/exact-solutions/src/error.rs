use gaussian_calculus::CalcError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("direction must be a unit tangential vector (norm {0})")]
    NonUnitDirection(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("multi-index {0:?} is not admissible")]
    BadMultiIndex(Vec<usize>),
    #[error("time must be negative, got t = {0}")]
    NonNegativeTime(f64),
    #[error("point {0:?} maps outside the truncated grid")]
    OutsideGrid(Vec<f64>),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error(transparent)]
    Calc(#[from] CalcError),
}
