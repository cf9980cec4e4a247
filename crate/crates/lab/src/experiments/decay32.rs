use gaussian_calculus::make_grid;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use signorini_solver::{solve_trajectory, BalancedFamily};
use weiss_diagnostics::Monitor;

use super::energy::{
    decay_run, dissipation_excess, identity_residual, min_second_difference, or_nan, DecayRun,
};
use super::{balanced, profile_constant, require_positive, tenth_stride, Context, Params};
use crate::recipe::{perturb_balanced, random_admissible, smooth_admissible};
use crate::report::Check;
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Decay32Params {
    /// Smallness: `W(u0) <= delta |u0|^2` and `dist^2 <= delta |u0|^2`.
    pub delta: f64,
    /// Stable modes used for the perturbations.
    pub modes: usize,
    /// Eigenpairs computed for the balanced profile.
    pub eigen_count: usize,
    pub fit_window: [f64; 2],
    pub r2_min: f64,
    /// `|v|^2` must decay at least at `(1 - rate_slack) gamma`.
    pub rate_slack: f64,
    /// Final snapshot increment allowed for the limit, relative to `|u0|`.
    pub limit_tol: f64,
    /// Grid spacings of the identity study, as multiples of `grid.h`.
    pub identity_levels: Vec<f64>,
    /// `dtau = identity_dtau_ratio * h` on every identity level.
    pub identity_dtau_ratio: f64,
    pub identity_tau: f64,
    /// Allowed `max C / min C` across the identity levels.
    pub identity_spread: f64,
    /// Random admissible runs added to the energy inequality checks.
    pub random_runs: usize,
    pub random_tau: f64,
    pub random_kappa: f64,
    /// Relative roundoff allowance for the dissipation and convexity
    /// checks.
    pub roundoff: f64,
}

impl Default for Decay32Params {
    fn default() -> Self {
        Self {
            delta: 0.05,
            modes: 6,
            eigen_count: 12,
            fit_window: [1.0, 6.0],
            r2_min: 0.98,
            rate_slack: 0.2,
            limit_tol: 1e-2,
            identity_levels: vec![4.0, 2.0, 1.0],
            identity_dtau_ratio: 0.2,
            identity_tau: 1.0,
            identity_spread: 3.0,
            random_runs: 20,
            random_tau: 2.0,
            random_kappa: 1.5,
            roundoff: 1e-9,
        }
    }
}

impl Params for Decay32Params {
    fn validate(&self) -> Result<()> {
        require_positive(
            "decay-32 parameters",
            &[
                self.delta,
                self.r2_min,
                self.limit_tol,
                self.identity_dtau_ratio,
                self.identity_tau,
                self.identity_spread,
                self.random_tau,
                self.random_kappa,
                self.roundoff,
            ],
        )?;
        require_positive("identity_levels", &self.identity_levels)?;
        if self.identity_levels.len() < 2 {
            return Err(super::bad_param("need at least two identity levels"));
        }
        if !(self.fit_window[0] < self.fit_window[1]) {
            return Err(super::bad_param("fit_window must be increasing"));
        }
        if !(0.0..1.0).contains(&self.rate_slack) {
            return Err(super::bad_param("rate_slack must lie in [0, 1)"));
        }
        if self.modes == 0 || self.eigen_count <= self.modes {
            return Err(super::bad_param("need 0 < modes < eigen_count"));
        }
        Ok(())
    }
}

pub(super) fn run(ctx: &mut Context<'_>) -> Result<()> {
    let p: Decay32Params = ctx.params()?;
    let grid = ctx.grid()?;
    let c_n = profile_constant(grid.dim())?;
    let bp = balanced(&grid, p.eigen_count)?;
    let family = BalancedFamily::new(&bp, c_n)?;

    // All random data are drawn up front, in a fixed order.
    let data: Vec<_> = (0..ctx.cfg.data.runs)
        .map(|_| perturb_balanced(&bp, &mut ctx.rng, ctx.cfg.data.perturbation, p.modes))
        .collect::<Result<_>>()?;
    let randoms: Vec<_> = (0..p.random_runs)
        .map(|_| random_admissible(&grid, &mut ctx.rng))
        .collect::<Result<_>>()?;
    let identity_rng = ctx.rng.clone();

    let mut scfg = ctx.default_solver(bp.kappa)?;
    scfg.snapshot_stride = tenth_stride(scfg.dtau());
    let runs: Vec<DecayRun> = data
        .par_iter()
        .map(|u0| decay_run(u0, &scfg, &family, p.fit_window, p.limit_tol))
        .collect::<Result<_>>()?;

    let rcfg = ctx.solver_config(p.random_kappa, ctx.cfg.solver.dtau, p.random_tau)?;
    let random_traces: Vec<_> = randoms
        .par_iter()
        .map(|u0| Ok(solve_trajectory(u0, &rcfg, &Monitor::Plain)?.trace))
        .collect::<Result<_>>()?;

    let mut fits = Vec::new();
    for (k, r) in runs.iter().enumerate() {
        ctx.out.trace(&format!("trace_run{k}.csv"), &r.trace)?;
        let (w_ratio, dist_ratio) = r.smallness();
        let (gamma, r2) = r.w_fit.clone().unwrap_or((f64::NAN, f64::NAN));
        fits.push(vec![
            k as f64,
            w_ratio,
            dist_ratio,
            gamma,
            r2,
            or_nan(&r.v_rate),
            or_nan(&r.min_c0),
            or_nan(&r.lambda_inf),
            r.norm0,
        ]);
    }
    ctx.out.csv(
        "decay_fits.csv",
        &["run", "w_ratio", "dist_ratio", "gamma", "r_squared", "v_rate", "c0", "lambda_inf", "norm0"],
        &fits,
    )?;

    energy_checks(ctx, &p, &runs, &random_traces, scfg.dtau(), rcfg.dtau())?;
    identity_check(ctx, &p, identity_rng)?;
    decay_check(ctx, &p, &runs);
    limit_check(ctx, &runs);
    Ok(())
}

fn energy_checks(
    ctx: &mut Context<'_>,
    p: &Decay32Params,
    runs: &[DecayRun],
    randoms: &[weiss_diagnostics::WeissTrace],
    dtau: f64,
    random_dtau: f64,
) -> Result<()> {
    let mut rows = Vec::new();
    let mut excess = f64::NEG_INFINITY;
    let mut curvature = f64::INFINITY;
    let all = runs
        .iter()
        .map(|r| (0.0, &r.trace, dtau))
        .chain(randoms.iter().map(|t| (1.0, t, random_dtau)));
    for (k, (kind, trace, dt)) in all.enumerate() {
        let e = dissipation_excess(trace, dt);
        let c = min_second_difference(trace);
        excess = excess.max(e);
        curvature = curvature.min(c);
        rows.push(vec![k as f64, kind, e, c]);
    }
    ctx.out.csv(
        "energy_inequalities.csv",
        &["run", "random", "dissipation_excess", "min_second_difference"],
        &rows,
    )?;
    let n = rows.len();
    ctx.check(
        Check::new(3, "dissipation inequality", excess <= p.roundoff, excess, p.roundoff)
            .with_detail(format!("largest relative excess over all pairs of {n} trajectories")),
    );
    ctx.check(
        Check::new(4, "convexity of the squared norm", -curvature <= p.roundoff, -curvature, p.roundoff)
            .with_detail(format!("most negative relative second difference over {n} trajectories")),
    );
    Ok(())
}

/// The same smooth admissible datum on successively finer grids, with
/// `dtau` proportional to `h`.
fn identity_check(ctx: &mut Context<'_>, p: &Decay32Params, rng: crate::recipe::LabRng) -> Result<()> {
    let g = &ctx.cfg.grid;
    let levels: Vec<(f64, f64)> = p
        .identity_levels
        .iter()
        .map(|f| (f * g.h, p.identity_dtau_ratio * f * g.h))
        .collect();
    let mut jobs = Vec::new();
    for &(h, dtau) in &levels {
        let grid = make_grid(g.n, g.radius, h)?;
        let u0 = smooth_admissible(&grid, &mut rng.clone())?;
        jobs.push((u0, ctx.solver_config(p.random_kappa, dtau, p.identity_tau)?));
    }
    let residuals: Vec<f64> = jobs
        .par_iter()
        .map(|(u0, scfg)| {
            let t = solve_trajectory(u0, scfg, &Monitor::Plain)?;
            Ok(identity_residual(&t.trace, scfg.dtau()))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = levels
        .iter()
        .zip(&residuals)
        .map(|(&(h, dt), &r)| vec![h, dt, r, r / (dt * dt + h)])
        .collect();
    ctx.out.csv("identity.csv", &["h", "dtau", "residual", "constant"], &rows)?;
    let cs: Vec<f64> = rows.iter().map(|r| r[3]).collect();
    let hi = cs.iter().copied().fold(0.0, f64::max);
    let lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    ctx.check(
        Check::new(2, "energy identity consistency", spread <= p.identity_spread, spread, p.identity_spread)
            .with_detail(format!(
                "max C / min C with C = residual / (dtau^2 + h); C = {}",
                cs.iter().map(|c| format!("{c:.3e}")).collect::<Vec<_>>().join(", ")
            )),
    );
    Ok(())
}

fn decay_check(ctx: &mut Context<'_>, p: &Decay32Params, runs: &[DecayRun]) {
    let mut ok = !runs.is_empty();
    let mut min_gamma = f64::INFINITY;
    let mut min_r2 = f64::INFINITY;
    let mut min_rate_ratio = f64::INFINITY;
    let mut min_c0 = f64::INFINITY;
    let mut worst_small = 0.0f64;
    let mut problems = Vec::new();
    for (k, r) in runs.iter().enumerate() {
        let (w_ratio, dist_ratio) = r.smallness();
        worst_small = worst_small.max(w_ratio).max(dist_ratio);
        if w_ratio > p.delta || dist_ratio > p.delta {
            ok = false;
            problems.push(format!("run {k} not small"));
        }
        match &r.w_fit {
            Ok((gamma, r2)) => {
                min_gamma = min_gamma.min(*gamma);
                min_r2 = min_r2.min(*r2);
                ok &= *gamma > 0.0 && *r2 >= p.r2_min;
                match &r.v_rate {
                    Ok(v) => {
                        let ratio = v / gamma;
                        min_rate_ratio = min_rate_ratio.min(ratio);
                        ok &= ratio >= 1.0 - p.rate_slack;
                    }
                    Err(e) => {
                        ok = false;
                        problems.push(format!("run {k} remainder fit: {e}"));
                    }
                }
            }
            Err(e) => {
                ok = false;
                problems.push(format!("run {k} energy fit: {e}"));
            }
        }
        match &r.min_c0 {
            Ok(c) => {
                min_c0 = min_c0.min(*c);
                ok &= *c > 0.0;
            }
            Err(e) => {
                ok = false;
                problems.push(format!("run {k} unit-time contraction: {e}"));
            }
        }
    }
    let mut detail = format!(
        "min gamma; min R^2 {min_r2:.4}, min remainder/energy rate {min_rate_ratio:.3}, \
         min c0 {min_c0:.3e}, worst smallness {worst_small:.3e} (delta {})",
        p.delta
    );
    if !problems.is_empty() {
        detail.push_str("; ");
        detail.push_str(&problems.join("; "));
    }
    ctx.check(
        Check::new(5, "exponential decay near regular profiles", ok, min_gamma, 0.0).with_detail(detail),
    );
}

fn limit_check(ctx: &mut Context<'_>, runs: &[DecayRun]) {
    let mut ok = !runs.is_empty();
    let mut worst = f64::INFINITY;
    let mut problems = Vec::new();
    for (k, r) in runs.iter().enumerate() {
        match &r.lambda_inf {
            Ok(l) => {
                let ratio = l / r.norm0;
                worst = worst.min(ratio);
                ok &= ratio > 0.5;
            }
            Err(e) => {
                ok = false;
                problems.push(format!("run {k}: {e}"));
            }
        }
    }
    let mut detail = "min lambda(inf) / |u0|".to_string();
    if !problems.is_empty() {
        detail.push_str("; ");
        detail.push_str(&problems.join("; "));
    }
    ctx.check(Check::new(6, "nontrivial regular limit", ok, worst, 0.5).with_detail(detail));
}
