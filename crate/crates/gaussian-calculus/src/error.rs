use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalcError {
    #[error("unsupported dimension n = {0} (expected 2 or 3)")]
    UnsupportedDim(usize),
    #[error("R/h = {radius}/{spacing} is not an integer")]
    NonIntegralRatio { radius: f64, spacing: f64 },
    #[error("invalid grid parameter: {0}")]
    InvalidParameter(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("axis {axis} has {count} nodes, stencil needs at least {needed}")]
    GridTooSmall {
        axis: usize,
        count: usize,
        needed: usize,
    },
    #[error("value length {got} does not match node count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("malformed field container: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
