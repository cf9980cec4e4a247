use gaussian_calculus::{l2mu_norm, GaussianMeasure, WeightedField};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use signorini_solver::{BalancedFamily, BalancedProfile, Forcing};
use weiss_diagnostics::WeissTrace;

use super::energy::{decay_run, DecayRun};
use super::{balanced, profile_constant, require_positive, tenth_stride, Context, Params};
use crate::recipe::{perturb_balanced, LabRng};
use crate::report::Check;
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InhomogeneousParams {
    /// `|f~(0)|` relative to the profile norm.
    pub forcing_size: f64,
    /// Decay rate of the forcing in `tau`.
    pub forcing_rate: f64,
    pub modes: usize,
    pub eigen_count: usize,
    pub fit_window: [f64; 2],
    /// Allowed `|gamma_forced - gamma| / gamma`.
    pub rate_tol: f64,
    /// Relative roundoff allowance for the monotonicity of the modified
    /// energy.
    pub roundoff: f64,
}

impl Default for InhomogeneousParams {
    fn default() -> Self {
        Self {
            forcing_size: 0.02,
            forcing_rate: 0.5,
            modes: 6,
            eigen_count: 12,
            fit_window: [1.0, 6.0],
            rate_tol: 0.25,
            roundoff: 1e-9,
        }
    }
}

impl Params for InhomogeneousParams {
    fn validate(&self) -> Result<()> {
        require_positive(
            "inhomogeneous parameters",
            &[self.forcing_size, self.forcing_rate, self.rate_tol, self.roundoff],
        )?;
        if !(self.fit_window[0] < self.fit_window[1]) {
            return Err(super::bad_param("fit_window must be increasing"));
        }
        if self.modes == 0 || self.eigen_count <= self.modes {
            return Err(super::bad_param("need 0 < modes < eigen_count"));
        }
        Ok(())
    }
}

/// A random combination of the first stable modes with the given norm.
fn forcing_profile(bp: &BalancedProfile, rng: &mut LabRng, modes: usize, size: f64) -> Result<WeightedField> {
    let grid = bp.field.grid();
    let m = GaussianMeasure::conformal(grid);
    let mut f = WeightedField::zeros(grid);
    for (_, mode) in bp.stable_modes().take(modes) {
        let c: f64 = StandardNormal.sample(rng);
        f = f.add_scaled(c, mode)?;
    }
    let scale = size * l2mu_norm(&bp.field, &m)? / l2mu_norm(&f, &m)?;
    Ok(f.scaled(scale))
}

/// Largest one-step increase of the modified energy beyond the implicit
/// Euler defect, relative to the trace scale.
fn modified_increase(trace: &WeissTrace, dtau: f64) -> f64 {
    let rows = trace.rows();
    let scale = rows
        .iter()
        .map(|r| r.weiss.abs().max(r.norm_sq))
        .fold(f64::MIN_POSITIVE, f64::max);
    rows.windows(2)
        .map(|w| {
            let (a, b) = (w[0].weiss_modified.unwrap_or(w[0].weiss), w[1].weiss_modified.unwrap_or(w[1].weiss));
            b - a - 0.5 * trace.kappa * dtau * dtau * w[1].dissipation
        })
        .fold(f64::NEG_INFINITY, f64::max)
        / scale
}

pub(super) fn run(ctx: &mut Context<'_>) -> Result<()> {
    let p: InhomogeneousParams = ctx.params()?;
    let grid = ctx.grid()?;
    let bp = balanced(&grid, p.eigen_count)?;
    let family = BalancedFamily::new(&bp, profile_constant(grid.dim())?)?;
    let mut cases = Vec::new();
    for _ in 0..ctx.cfg.data.runs {
        let u0 = perturb_balanced(&bp, &mut ctx.rng, ctx.cfg.data.perturbation, p.modes)?;
        let f = forcing_profile(&bp, &mut ctx.rng, p.modes, p.forcing_size)?;
        cases.push((u0, f));
    }
    let mut free = ctx.default_solver(bp.kappa)?;
    free.snapshot_stride = tenth_stride(free.dtau());
    let dtau = free.dtau();
    let pairs: Vec<(DecayRun, DecayRun)> = cases
        .par_iter()
        .map(|(u0, f)| {
            let mut forced = free.clone();
            forced.forcing = Some(Forcing {
                profile: f.clone(),
                rate: p.forcing_rate,
            });
            forced.validate()?;
            // The limit tolerance is irrelevant here; only rates are compared.
            let a = decay_run(u0, &free, &family, p.fit_window, f64::INFINITY)?;
            let b = decay_run(u0, &forced, &family, p.fit_window, f64::INFINITY)?;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut ok = !pairs.is_empty();
    let mut worst_rate = 0.0f64;
    let mut worst_increase = f64::NEG_INFINITY;
    let mut problems = Vec::new();
    for (k, (a, b)) in pairs.iter().enumerate() {
        ctx.out.trace(&format!("trace_free_{k}.csv"), &a.trace)?;
        ctx.out.trace(&format!("trace_forced_{k}.csv"), &b.trace)?;
        let inc = modified_increase(&b.trace, dtau);
        worst_increase = worst_increase.max(inc);
        ok &= inc <= p.roundoff;
        match (&a.w_fit, &b.w_fit) {
            (Ok((ga, _)), Ok((gb, _))) => {
                let rel = (gb - ga).abs() / ga;
                worst_rate = worst_rate.max(rel);
                ok &= *ga > 0.0 && rel <= p.rate_tol;
                rows.push(vec![k as f64, *ga, *gb, rel, inc]);
            }
            (x, y) => {
                ok = false;
                for e in [x.as_ref().err(), y.as_ref().err()].into_iter().flatten() {
                    problems.push(format!("run {k}: {e}"));
                }
                rows.push(vec![k as f64, f64::NAN, f64::NAN, f64::NAN, inc]);
            }
        }
    }
    ctx.out.csv("rates.csv", &["run", "gamma_free", "gamma_forced", "relative_change", "modified_increase"], &rows)?;
    let mut detail = format!(
        "max relative rate change; modified energy increase {worst_increase:.2e} (allowed {:.0e})",
        p.roundoff
    );
    if !problems.is_empty() {
        detail = format!("{detail}; {}", problems.join("; "));
    }
    ctx.check(
        Check::new(13, "decay under decaying forcing", ok, worst_rate, p.rate_tol).with_detail(detail),
    );
    Ok(())
}
