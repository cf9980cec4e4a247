//! Implicit Euler evolution of the thin obstacle problem in self-similar
//! variables,
//! `d_tau u + y/2 . grad u - 1/4 Lap u - kappa/2 u = e^{tau(kappa/2-1)} f~`
//! in the half-space with `u >= 0`, `d_n u <= 0`, `u d_n u = 0` on
//! `{y_n = 0}`.
//!
//! The spatial operator is the gradient of the discrete Weiss energy
//! `u^T (K - kappa/2 M) u`, with `K` from the edge Dirichlet form and `M`
//! the trapezoid mass. The interior is eliminated once by a banded
//! Cholesky factorization; each step then solves a dense problem on the
//! contact plane, either the complementarity problem (projected scheme) or
//! the penalized equation `d_n u = beta_eps(u)`.

mod balanced;
mod config;
mod error;
mod operator;
mod penalty;
mod solver;
mod trajectory;

pub use balanced::{balanced_profile, BalancedFamily, BalancedProfile};
pub use config::{Forcing, Scheme, SolverConfig};
pub use error::SolverError;
pub use operator::{apply_weiss_operator, DiscreteOperator};
pub use penalty::Penalty;
pub use solver::{Solver, SolverState};
pub use trajectory::{
    cross_validate, drift, field_complementarity, residual_complementarity, run,
    solve_trajectory, Complementarity, CrossValidation, Trajectory,
};

pub type Result<T> = std::result::Result<T, SolverError>;
