use std::collections::VecDeque;

use gaussian_calculus::WeightedField;

use crate::config::{Scheme, SolverConfig};
use crate::operator::DiscreteOperator;
use crate::penalty::Penalty;
use crate::{Result, SolverError};

const HISTORY: usize = 3;

#[derive(Debug, Clone)]
pub struct SolverState {
    /// The field at `tau = field.time()`, zero on the truncation faces.
    pub field: WeightedField,
    /// `d_n u` at every node of the layer `y_n = 0`, in boundary order.
    /// Derived from the boundary force of the last step; zero initially.
    pub normal_derivative: Vec<f64>,
    /// Recent fields, newest last, for difference quotients in `tau`.
    pub history: VecDeque<WeightedField>,
    /// `|u^{k+1} - u^k|^2 / dtau` of the step that produced this state.
    pub dissipation: f64,
    /// `int (u^{k+1} - u^k) e^{tau(kappa/2-1)} f~ dmu` of the last step.
    pub forcing_work: f64,
    /// Sweeps used by the boundary iteration of the last step.
    pub sweeps: usize,
}

impl SolverState {
    pub fn tau(&self) -> f64 {
        self.field.time()
    }

    /// Smallest value on the contact plane.
    pub fn min_trace(&self) -> f64 {
        self.field
            .boundary_trace()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// A configured solver: operator factorization plus scheme parameters.
pub struct Solver {
    op: DiscreteOperator,
    cfg: SolverConfig,
    penalty: Option<Penalty>,
}

impl Solver {
    pub fn new(grid: &gaussian_calculus::HalfSpaceGrid, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if let Some(f) = &cfg.forcing {
            if !f.profile.grid().same_as(grid) {
                return Err(SolverError::GridMismatch);
            }
        }
        let op = DiscreteOperator::new(grid, cfg.kappa(), cfg.dtau())?;
        let penalty = cfg.penalty();
        Ok(Self { op, cfg, penalty })
    }

    pub fn operator(&self) -> &DiscreteOperator {
        &self.op
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Start from `field` at `tau = 0`. Truncation values are set to zero;
    /// for the projected scheme a negative trace is clipped at zero.
    pub fn initial_state(&self, field: &WeightedField) -> Result<SolverState> {
        let g = self.op.grid();
        if !field.grid().same_as(g) {
            return Err(SolverError::GridMismatch);
        }
        let mut values = field.values().to_vec();
        for (idx, v) in values.iter_mut().enumerate() {
            if g.is_truncation(idx) {
                *v = 0.0;
            }
        }
        if self.cfg.scheme == Scheme::Projected {
            let mut clipped = 0usize;
            for b in 0..g.boundary_len() {
                let v = &mut values[g.boundary_node(b)];
                if *v < 0.0 {
                    *v = 0.0;
                    clipped += 1;
                }
            }
            if clipped > 0 {
                log::warn!("clipped {clipped} negative trace values of the initial data");
            }
        }
        let field = WeightedField::new(g.clone(), values, 0.0)?;
        Ok(SolverState {
            history: VecDeque::from([field.clone()]),
            field,
            normal_derivative: vec![0.0; g.boundary_len()],
            dissipation: 0.0,
            forcing_work: 0.0,
            sweeps: 0,
        })
    }

    /// One implicit Euler step.
    pub fn step(&self, state: &SolverState) -> Result<SolverState> {
        let op = &self.op;
        let g = op.grid();
        let m = op.measure();
        let dtau = self.cfg.dtau();
        let tau = state.tau() + dtau;
        let mass = m.weights();
        let u0 = state.field.values();

        let forcing: Option<Vec<f64>> = self.cfg.forcing.as_ref().map(|f| {
            let s = (tau * (0.5 * self.cfg.kappa() - 1.0)).exp() * f.value_factor(tau);
            f.profile.values().iter().map(|v| s * v).collect()
        });
        let mut rhs: Vec<f64> = u0
            .iter()
            .zip(mass)
            .map(|(u, w)| w * u / dtau)
            .collect();
        if let Some(f) = &forcing {
            for ((r, w), v) in rhs.iter_mut().zip(mass).zip(f) {
                *r += w * v;
            }
        }
        let (y, reduced) = op.reduce(&rhs)?;
        let mut plane: Vec<f64> = op
            .plane()
            .iter()
            .map(|&b| u0[g.boundary_node(b)])
            .collect();
        let sweeps = match self.penalty {
            None => self.projected_sweeps(&mut plane, &reduced, tau)?,
            Some(p) => self.penalized_sweeps(&p, &mut plane, &reduced, tau)?,
        };
        let interior = op.back_substitute(&y, &plane)?;
        let values = op.assemble(&interior, &plane);
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite(tau));
        }

        let bw = m.boundary_weights();
        let mut normal_derivative = vec![0.0; g.boundary_len()];
        for (p, &b) in op.plane().iter().enumerate() {
            let force = op.schur_row_dot(p, &plane) - reduced[p];
            normal_derivative[b] = -4.0 * force / bw[b];
        }
        let mut dissipation = 0.0;
        let mut forcing_work = 0.0;
        for (i, (a, b)) in values.iter().zip(u0).enumerate() {
            let d = a - b;
            dissipation += mass[i] * d * d;
            if let Some(f) = &forcing {
                forcing_work += mass[i] * d * f[i];
            }
        }
        let field = WeightedField::new(g.clone(), values, tau)?;
        let mut history = state.history.clone();
        history.push_back(field.clone());
        while history.len() > HISTORY {
            history.pop_front();
        }
        Ok(SolverState {
            field,
            normal_derivative,
            history,
            dissipation: dissipation / dtau,
            forcing_work,
            sweeps,
        })
    }

    fn projected_sweeps(&self, u: &mut [f64], r: &[f64], tau: f64) -> Result<usize> {
        let op = &self.op;
        let nb = op.plane_len();
        let t = op.schur();
        let omega = self.cfg.relaxation;
        let mut residual = f64::INFINITY;
        for sweep in 1..=self.cfg.max_sweeps {
            for b in 0..nb {
                let tu = op.schur_row_dot(b, u);
                u[b] = (u[b] + omega * (r[b] - tu) / t[b * nb + b]).max(0.0);
            }
            residual = (0..nb)
                .map(|b| {
                    let w = (op.schur_row_dot(b, u) - r[b]) / t[b * nb + b];
                    u[b].min(w).abs()
                })
                .fold(0.0, f64::max);
            if residual <= self.cfg.tolerance {
                return Ok(sweep);
            }
        }
        Err(SolverError::NotConverged {
            tau,
            iterations: self.cfg.max_sweeps,
            residual,
        })
    }

    /// Nonlinear Gauss-Seidel: every node solves its own scalar equation
    /// `(T u)_b - r_b + mu'_b/4 beta(u_b) = 0` exactly.
    fn penalized_sweeps(&self, p: &Penalty, u: &mut [f64], r: &[f64], tau: f64) -> Result<usize> {
        let op = &self.op;
        let nb = op.plane_len();
        let t = op.schur();
        let bw = op.measure().boundary_weights();
        let q: Vec<f64> = op.plane().iter().map(|&b| 0.25 * bw[b]).collect();
        let mut residual = f64::INFINITY;
        for sweep in 1..=self.cfg.max_sweeps {
            for b in 0..nb {
                let d = t[b * nb + b];
                let off = op.schur_row_dot(b, u) - d * u[b];
                u[b] = p.solve_scalar(d, q[b], r[b] - off);
            }
            residual = (0..nb)
                .map(|b| {
                    let f = op.schur_row_dot(b, u) - r[b] + q[b] * p.beta(u[b]);
                    (f / t[b * nb + b]).abs()
                })
                .fold(0.0, f64::max);
            if residual <= self.cfg.tolerance {
                return Ok(sweep);
            }
        }
        Err(SolverError::NotConverged {
            tau,
            iterations: self.cfg.max_sweeps,
            residual,
        })
    }
}
