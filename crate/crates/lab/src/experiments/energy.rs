//! Energy bookkeeping shared by the trajectory experiments.

use gaussian_calculus::{l2mu_norm, GaussianMeasure, WeightedField};
use signorini_solver::{solve_trajectory, BalancedFamily, SolverConfig};
use weiss_diagnostics::{
    epiperimetric_check, fit_exponential, limit_extraction, project_e32, weiss_energy, EpiVariant,
    LimitProfile, LimitTarget, Monitor, WeissTrace,
};

use crate::Result;

fn scale(trace: &WeissTrace) -> f64 {
    trace
        .rows()
        .iter()
        .map(|r| r.weiss.abs().max(r.norm_sq))
        .fold(f64::MIN_POSITIVE, f64::max)
}

/// Largest `W(tau_j) - W(tau_i) + 2 int_i^j |d_tau u|^2 - (kappa/2) dtau int_i^j |d_tau u|^2`
/// over all sampled pairs `i < j`, relative to the trace scale.
///
/// The subtracted term is the exact defect of implicit Euler: one step
/// changes `W` by the dissipation minus `(kappa/2) |u_{k+1} - u_k|^2`.
pub(crate) fn dissipation_excess(trace: &WeissTrace, dtau: f64) -> f64 {
    let rows = trace.rows();
    let kappa = trace.kappa;
    let mut cum = vec![0.0; rows.len()];
    for k in 1..rows.len() {
        cum[k] = cum[k - 1] + rows[k].dissipation * dtau;
    }
    let mut worst = f64::NEG_INFINITY;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let d = cum[j] - cum[i];
            let excess = rows[j].weiss - rows[i].weiss + 2.0 * d - 0.5 * kappa * dtau * d;
            worst = worst.max(excess);
        }
    }
    worst / scale(trace)
}

/// Smallest second difference of `|u|^2`, relative to the trace scale.
pub(crate) fn min_second_difference(trace: &WeissTrace) -> f64 {
    let n = trace.norm_sq();
    let s = scale(trace);
    n.windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]) / s)
        .fold(f64::INFINITY, f64::min)
}

/// `max_k |W_k + (|u_{k+1}|^2 - |u_{k-1}|^2) / (4 dtau)|` over interior rows.
pub(crate) fn identity_residual(trace: &WeissTrace, dtau: f64) -> f64 {
    let rows = trace.rows();
    rows.windows(3)
        .map(|w| (w[1].weiss + (w[2].norm_sq - w[0].norm_sq) / (4.0 * dtau)).abs())
        .fold(0.0, f64::max)
}

/// Outcome of one run near the regular family.
#[derive(Debug, Clone)]
pub(crate) struct DecayRun {
    pub trace: WeissTrace,
    pub norm0: f64,
    pub w0: f64,
    pub dist0_sq: f64,
    /// `(gamma, R^2)` of `ln W` on the fit window.
    pub w_fit: std::result::Result<(f64, f64), String>,
    /// Rate of `|v|^2` on the fit window.
    pub v_rate: std::result::Result<f64, String>,
    pub min_c0: std::result::Result<f64, String>,
    /// `lambda(inf)` from the last snapshots, or why it is unavailable.
    pub lambda_inf: std::result::Result<f64, String>,
}

impl DecayRun {
    pub fn smallness(&self) -> (f64, f64) {
        let n2 = self.norm0 * self.norm0;
        (self.w0 / n2, self.dist0_sq / n2)
    }
}

/// Run `u0` at the configured homogeneity and collect the decay
/// diagnostics against `family`.
pub(crate) fn decay_run(
    u0: &WeightedField,
    scfg: &SolverConfig,
    family: &BalancedFamily,
    window: [f64; 2],
    limit_tol: f64,
) -> Result<DecayRun> {
    let m = GaussianMeasure::conformal(u0.grid());
    let monitor = Monitor::E32(Box::new(family.clone()));
    let t = solve_trajectory(u0, scfg, &monitor)?;
    let norm0 = l2mu_norm(u0, &m)?;
    let dec = project_e32(u0, family, &m)?;
    let dist0_sq = l2mu_norm(&dec.remainder, &m)?.powi(2);
    let w0 = weiss_energy(u0, scfg.kappa(), &m)?;
    let tau = t.trace.taus();
    let w = t.trace.weiss();
    let v: Vec<f64> = t.trace.rows().iter().map(|r| r.v_norm_sq.unwrap_or(0.0)).collect();
    let range = (window[0], window[1]);
    let w_fit = fit_exponential(&tau, &w, range)
        .map(|f| (f.gamma.unwrap_or(f64::NAN), f.r_squared))
        .map_err(|e| e.to_string());
    let v_rate = fit_exponential(&tau, &v, range)
        .map(|f| f.gamma.unwrap_or(f64::NAN))
        .map_err(|e| e.to_string());
    let min_c0 = epiperimetric_check(&t.trace, EpiVariant::Contraction, 0.0)
        .map_err(|e| e.to_string())
        .and_then(|r| r.min_c0.ok_or_else(|| "degenerate trace".to_string()));
    let fields: Vec<WeightedField> = t.snapshots.into_iter().map(|s| s.field).collect();
    let lambda_inf = limit_extraction(&t.trace, &fields, LimitTarget::Regular(family), &m, limit_tol * norm0)
        .map_err(|e| e.to_string())
        .map(|r| match r.profile {
            LimitProfile::Regular { lambda, .. } => lambda,
            LimitProfile::Singular(_) => f64::NAN,
        });
    Ok(DecayRun {
        trace: t.trace,
        norm0,
        w0,
        dist0_sq,
        w_fit,
        v_rate,
        min_c0,
        lambda_inf,
    })
}

/// `NaN` for unavailable values in CSV rows.
pub(crate) fn or_nan<T: Into<f64> + Copy>(r: &std::result::Result<T, String>) -> f64 {
    r.as_ref().map(|v| (*v).into()).unwrap_or(f64::NAN)
}
