use conformal_transform::ConformalFrame;
use gaussian_calculus::{l2mu_norm, GaussianMeasure, WeightedField};

use crate::penalty::Penalty;
use crate::{Result, SolverError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Discrete variational inequality on the boundary nodes, solved by
    /// projected over-relaxed Gauss-Seidel.
    Projected,
    /// Nonlinear boundary condition `d_n u = beta_eps(u)`.
    Penalized { epsilon: f64 },
}

/// `f~(y, tau) = e^{-rate tau} profile(y)`.
#[derive(Debug, Clone)]
pub struct Forcing {
    pub profile: WeightedField,
    pub rate: f64,
}

impl Forcing {
    pub fn value_factor(&self, tau: f64) -> f64 {
        (-self.rate * tau).exp()
    }

    /// `M = sup_tau |f~(tau)|_{L^2_mu}` over the sampled slices
    /// `0, dtau, ..., tau_max`.
    pub fn bound(&self, m: &GaussianMeasure, frame: &ConformalFrame) -> Result<f64> {
        let base = l2mu_norm(&self.profile, m)?;
        let steps = frame.steps();
        Ok((0..=steps)
            .map(|k| base * self.value_factor(k as f64 * frame.dtau()))
            .fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub frame: ConformalFrame,
    pub scheme: Scheme,
    /// Stopping tolerance of the boundary iteration, in units of `u`.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Over-relaxation of the projected sweeps.
    pub relaxation: f64,
    pub forcing: Option<Forcing>,
    /// Keep every `snapshot_stride`-th state.
    pub snapshot_stride: usize,
}

impl SolverConfig {
    pub fn new(frame: ConformalFrame, scheme: Scheme) -> Self {
        Self {
            frame,
            scheme,
            tolerance: 1e-10,
            max_sweeps: 20_000,
            relaxation: 1.5,
            forcing: None,
            snapshot_stride: 1,
        }
    }

    pub fn kappa(&self) -> f64 {
        self.frame.kappa()
    }

    pub fn dtau(&self) -> f64 {
        self.frame.dtau()
    }

    pub fn penalty(&self) -> Option<Penalty> {
        match self.scheme {
            Scheme::Penalized { epsilon } => Penalty::new(epsilon),
            Scheme::Projected => None,
        }
    }

    /// The implicit step matrix `M/dtau + K - kappa/2 M` is positive
    /// definite for every grid as long as `dtau < 2/kappa`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if self.kappa() > 0.0 && self.dtau() * self.kappa() >= 2.0 {
            return bad(format!(
                "dtau = {} must be below 2/kappa = {}",
                self.dtau(),
                2.0 / self.kappa()
            ));
        }
        if let Scheme::Penalized { epsilon } = self.scheme {
            if Penalty::new(epsilon).is_none() {
                return bad(format!("penalty epsilon must be positive, got {epsilon}"));
            }
        }
        if !(self.tolerance > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.max_sweeps == 0 || self.snapshot_stride == 0 {
            return bad("sweep cap and snapshot stride must be positive".into());
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return bad(format!(
                "relaxation must lie in (0, 2), got {}",
                self.relaxation
            ));
        }
        Ok(())
    }
}
