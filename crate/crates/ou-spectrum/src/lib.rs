//! Eigenvalues of `L = -1/2 Lap + y . grad` on `R^2` minus the slit
//! `{y_2 = 0, y_1 <= 0}`, Dirichlet on the slit, for eigenfunctions even
//! in `y_2`.
//!
//! The square map `y_1 + i y_2 = (z_1 + i z_2)^2` opens the slit onto the
//! line `{z_1 = 0}` and turns the problem into
//! `-Lap_z u = 4|z|^2 (2 lambda u - z . grad_z u)` on `{z_1 > 0}`. In weak
//! form this is the pencil `A u = lambda B u` with `A` the Dirichlet form
//! weighted by `e^{-|z|^4}` and `B` the mass weighted by
//! `8|z|^2 e^{-|z|^4}`, both symmetric.

mod check3d;
mod problem;
mod study;

pub use check3d::{residual_check_3d, Residual3d};
pub use problem::{
    assemble, correlation, solve_lowest, verify_eigenspace, SlitEigenProblem, SpanReport,
    Spectrum, Symmetry,
};
pub use study::{refinement_study, RefinementRow, RefinementTable};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigenvalues {0} and {1} are closer than the cluster threshold")]
    Degenerate(f64, f64),
    #[error(transparent)]
    Linalg(#[from] banded_linalg::LinalgError),
    #[error(transparent)]
    Calc(#[from] gaussian_calculus::CalcError),
}

pub type Result<T> = std::result::Result<T, SpectrumError>;
