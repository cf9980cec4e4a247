//! Numerical substrate for the Signorini laboratory.
//!
//! Everything downstream works on a truncated half-space
//! `[-R, R]^{n-1} x [0, R]` sampled on a uniform tensor grid whose last axis
//! is the normal direction `y_n`. Integrals are taken against a Gaussian
//! density (either `e^{-|y|^2}` or `e^{-|x|^2/4}`) with trapezoid weights.
//!
//! The crate provides:
//! - [`HalfSpaceGrid`] and [`make_grid`]
//! - [`GaussianMeasure`] with node weights and boundary-layer weights
//! - [`WeightedField`] with weighted inner products and norms
//! - finite-difference calculus in [`fd`]
//! - a flat binary container and CSV export in [`io`]

mod error;
pub mod fd;
mod field;
mod grid;
pub mod io;
mod measure;

pub use error::CalcError;
pub use fd::{
    boundary_trace_integral, dirichlet_form, gradient_fd, laplacian_fd, normal_derivative,
};
pub use field::{inner_mu, l2mu_norm, w12mu_norm, WeightedField};
pub use grid::{make_grid, HalfSpaceGrid, MAX_DIM};
pub use measure::{GaussianMeasure, MeasureKind};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CalcError>;
