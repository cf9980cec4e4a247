use gaussian_calculus::{inner_mu, GaussianMeasure};

use crate::energy::{boundary_integral, weiss_energy};
use crate::proj2m::{lambda_2m, project_e2m, E2mBasis};
use crate::trace::Snapshot;
use crate::{DiagError, Result};

/// How `d/dtau` is discretized in the residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Differencing {
    /// `(X_{k+1} - X_{k-1}) / (2 dtau)` against the right-hand side at `k`.
    Centered,
    /// `(X_k - X_{k-1}) / dtau` against the right-hand side at `k`; the
    /// difference quotient the implicit Euler scheme itself satisfies.
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResidual2m {
    pub tau: f64,
    /// `1/2 d|v|^2 + W_{2m}(v) - sum lambda_alpha/4 int p_alpha d_n v`.
    pub weiss2m: f64,
    /// `d lambda_alpha + 1/4 int p_alpha d_n v`, one per basis element.
    pub lambda: Vec<f64>,
    /// `lambda_{2m}(tau_k) - lambda_{2m}(tau_{k-1})`.
    pub lambda_2m_increment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residuals2m {
    /// `|W_{2m}(u) - W_{2m}(v)|` at every snapshot.
    pub weiss_equal: Vec<f64>,
    pub steps: Vec<StepResidual2m>,
}

impl Residuals2m {
    pub fn max_weiss_equal(&self) -> f64 {
        self.weiss_equal.iter().fold(0.0, |a, b| a.max(*b))
    }

    pub fn max_weiss2m(&self) -> f64 {
        self.steps.iter().fold(0.0, |a, s| a.max(s.weiss2m.abs()))
    }

    pub fn max_lambda(&self) -> f64 {
        self.steps
            .iter()
            .flat_map(|s| &s.lambda)
            .fold(0.0, |a, b| a.max(b.abs()))
    }

    pub fn min_lambda_2m_increment(&self) -> f64 {
        self.steps
            .iter()
            .fold(f64::INFINITY, |a, s| a.min(s.lambda_2m_increment))
    }
}

struct Sample {
    tau: f64,
    coeffs: Vec<f64>,
    v_sq: f64,
    w_v: f64,
    lambda_2m: f64,
    /// `int p_alpha d_n u dmu'`; `d_n p_alpha = 0` on the boundary, so this
    /// equals the integral against `d_n v`.
    flux: Vec<f64>,
}

/// Residuals of the `kappa = 2m` evolution of the coefficients and of the
/// remainder energy along a uniformly spaced trajectory.
pub fn evolution_residuals_2m(
    snapshots: &[Snapshot],
    basis: &E2mBasis,
    m: &GaussianMeasure,
    differencing: Differencing,
) -> Result<Residuals2m> {
    let needed = match differencing {
        Differencing::Centered => 3,
        Differencing::Backward => 2,
    };
    if snapshots.len() < needed {
        return Err(DiagError::TooShort(format!(
            "{} snapshots, need at least {needed}",
            snapshots.len()
        )));
    }
    let kappa = 2.0 * basis.m() as f64;
    let traces: Vec<Vec<f64>> = basis.fields().iter().map(|p| p.boundary_trace()).collect();
    let mut samples = Vec::with_capacity(snapshots.len());
    let mut weiss_equal = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let dec = project_e2m(&s.field, basis, m)?;
        let w_u = weiss_energy(&s.field, kappa, m)?;
        let w_v = weiss_energy(&dec.remainder, kappa, m)?;
        weiss_equal.push((w_u - w_v).abs());
        samples.push(Sample {
            tau: s.tau(),
            v_sq: inner_mu(&dec.remainder, &dec.remainder, m)?,
            w_v,
            lambda_2m: lambda_2m(&s.field, basis, m)?,
            flux: traces
                .iter()
                .map(|t| boundary_integral(t, &s.normal_derivative, m))
                .collect(),
            coeffs: dec.coeffs,
        });
    }
    let dtau = samples[1].tau - samples[0].tau;
    for w in samples.windows(2) {
        let d = w[1].tau - w[0].tau;
        if (d - dtau).abs() > 1e-9 * dtau.abs().max(1.0) {
            return Err(DiagError::InvalidArgument(
                "snapshots must be uniformly spaced in tau".into(),
            ));
        }
    }
    let range = match differencing {
        Differencing::Centered => 1..samples.len() - 1,
        Differencing::Backward => 1..samples.len(),
    };
    let mut steps = Vec::new();
    for k in range {
        let (lo, hi, span) = match differencing {
            Differencing::Centered => (k - 1, k + 1, 2.0 * dtau),
            Differencing::Backward => (k - 1, k, dtau),
        };
        let s = &samples[k];
        let forcing: f64 = s
            .coeffs
            .iter()
            .zip(&s.flux)
            .map(|(l, f)| 0.25 * l * f)
            .sum();
        let weiss2m = 0.5 * (samples[hi].v_sq - samples[lo].v_sq) / span + s.w_v - forcing;
        let lambda = (0..s.coeffs.len())
            .map(|a| (samples[hi].coeffs[a] - samples[lo].coeffs[a]) / span + 0.25 * s.flux[a])
            .collect();
        steps.push(StepResidual2m {
            tau: s.tau,
            weiss2m,
            lambda,
            lambda_2m_increment: s.lambda_2m - samples[k - 1].lambda_2m,
        });
    }
    Ok(Residuals2m { weiss_equal, steps })
}
