use gaussian_calculus::{inner_mu, GaussianMeasure, HalfSpaceGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use signorini_solver::solve_trajectory;
use weiss_diagnostics::{
    envelope_rate, evolution_residuals_2m, weiss_energy, Differencing, E2mBasis, Monitor, Residuals2m,
    WeissTrace,
};

use super::{require_positive, Context, Params};
use crate::recipe::{below_2m, e2_with_contact, negative_energy};
use crate::report::Check;
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Decay2mParams {
    /// Homogeneities of the negative-energy growth runs.
    pub growth_kappas: Vec<f64>,
    pub growth_runs: usize,
    /// The growth bound is checked from this time on.
    pub growth_from: f64,
    /// Relative shortfall allowed against the growth bound.
    pub growth_tol: f64,
    /// `|W_2m(u) - W_2m(v)| <= weiss_equal_constant h^2 |u|^2`.
    pub weiss_equal_constant: f64,
    /// `|lambda residual| <= lambda_constant (dtau^2 + h^2) |u|`.
    pub lambda_constant: f64,
    /// Allowed decrease of `lambda_2m` per step, in units of
    /// `dtau h^2 |u|`: the sampled `h_2m` is stationary for the scheme only
    /// up to `O(h^2)`.
    pub increment_constant: f64,
    /// Orders `m` of the below-`2m` energy bound.
    pub below_orders: Vec<usize>,
    pub below_draws: usize,
    pub below_tol: f64,
}

impl Default for Decay2mParams {
    fn default() -> Self {
        Self {
            growth_kappas: vec![1.5, 2.0],
            growth_runs: 5,
            growth_from: 1.0,
            growth_tol: 1e-2,
            weiss_equal_constant: 1.0,
            lambda_constant: 1.0,
            increment_constant: 1.0,
            below_orders: vec![1, 2],
            below_draws: 100,
            below_tol: 1e-3,
        }
    }
}

impl Params for Decay2mParams {
    fn validate(&self) -> Result<()> {
        require_positive("growth_kappas", &self.growth_kappas)?;
        require_positive(
            "decay-2m parameters",
            &[
                self.growth_tol,
                self.weiss_equal_constant,
                self.lambda_constant,
                self.increment_constant,
                self.below_tol,
            ],
        )?;
        if self.growth_from < 0.0 {
            return Err(super::bad_param("growth_from must be nonnegative"));
        }
        if self.below_orders.contains(&0) {
            return Err(super::bad_param("below_orders must be at least 1"));
        }
        Ok(())
    }
}

pub(super) fn run(ctx: &mut Context<'_>) -> Result<()> {
    let p: Decay2mParams = ctx.params()?;
    let grid = ctx.grid()?;
    growth(ctx, &p, &grid)?;
    residuals(ctx, &p, &grid)?;
    below(ctx, &p, &grid)?;
    Ok(())
}

/// `N0 - 2 W0 (e^{gamma tau} - 1) / gamma`, with the `gamma -> 0` limit.
fn growth_bound(n0: f64, w0: f64, gamma: f64, tau: f64) -> f64 {
    let factor = if gamma.abs() < 1e-12 {
        tau
    } else {
        (gamma * tau).exp_m1() / gamma
    };
    n0 - 2.0 * w0 * factor
}

/// Smallest `N(tau) / bound(tau)` over `tau >= from`, and the envelope rate.
fn growth_ratio(trace: &WeissTrace, from: f64) -> Result<(f64, f64)> {
    let tau = trace.taus();
    let w = trace.weiss();
    let n = trace.norm_sq();
    let gamma = envelope_rate(&tau, &w)?;
    let ratio = tau
        .iter()
        .zip(&n)
        .filter(|(t, _)| **t >= from)
        .map(|(&t, &nt)| nt / growth_bound(n[0], w[0], gamma, t - tau[0]))
        .fold(f64::INFINITY, f64::min);
    Ok((ratio, gamma))
}

fn growth(ctx: &mut Context<'_>, p: &Decay2mParams, grid: &HalfSpaceGrid) -> Result<()> {
    let mut jobs = Vec::new();
    for &kappa in &p.growth_kappas {
        for k in 0..p.growth_runs {
            let u0 = negative_energy(grid, &mut ctx.rng, kappa)?;
            jobs.push((kappa, k, u0, ctx.default_solver(kappa)?));
        }
    }
    let traces: Vec<WeissTrace> = jobs
        .par_iter()
        .map(|(_, _, u0, scfg)| Ok(solve_trajectory(u0, scfg, &Monitor::Plain)?.trace))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    let mut problems = Vec::new();
    for ((kappa, k, _, _), trace) in jobs.iter().zip(&traces) {
        ctx.out.trace(&format!("trace_growth_k{kappa}_{k}.csv"), trace)?;
        match growth_ratio(trace, p.growth_from) {
            Ok((ratio, gamma)) => {
                worst = worst.min(ratio);
                rows.push(vec![*kappa, *k as f64, gamma, ratio]);
            }
            Err(e) => {
                worst = f64::NAN;
                problems.push(format!("kappa {kappa} run {k}: {e}"));
                rows.push(vec![*kappa, *k as f64, f64::NAN, f64::NAN]);
            }
        }
    }
    ctx.out.csv("growth.csv", &["kappa", "run", "gamma", "min_ratio"], &rows)?;
    let limit = 1.0 - p.growth_tol;
    let ok = problems.is_empty() && worst >= limit && !traces.is_empty();
    let mut detail = format!("min N(tau) / bound over tau >= {} and {} runs", p.growth_from, rows.len());
    if !problems.is_empty() {
        detail = format!("{detail}; {}", problems.join("; "));
    }
    ctx.check(Check::new(7, "growth under negative energy", ok, worst, limit).with_detail(detail));
    Ok(())
}

fn residuals(ctx: &mut Context<'_>, p: &Decay2mParams, grid: &HalfSpaceGrid) -> Result<()> {
    let basis = E2mBasis::new(grid, 1)?;
    let meas = GaussianMeasure::conformal(grid);
    let data: Vec<_> = (0..ctx.cfg.data.runs)
        .map(|_| e2_with_contact(grid, &mut ctx.rng, ctx.cfg.data.perturbation))
        .collect::<Result<_>>()?;
    let mut scfg = ctx.default_solver(2.0)?;
    scfg.snapshot_stride = 1;
    let monitor = Monitor::E2m(basis.clone());
    let results: Vec<(WeissTrace, Residuals2m, f64)> = data
        .par_iter()
        .map(|u0| {
            let t = solve_trajectory(u0, &scfg, &monitor)?;
            let r = evolution_residuals_2m(&t.snapshots, &basis, &meas, Differencing::Backward)?;
            // The flow at kappa = 2 does not increase the norm.
            Ok((t.trace, r, inner_mu(u0, u0, &meas)?.sqrt()))
        })
        .collect::<Result<_>>()?;

    let (h, dtau) = (grid.spacing(), scfg.dtau());
    let mut rows = Vec::new();
    let (mut c_weiss, mut c_lambda, mut worst_increment) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut max_weiss2m = 0.0f64;
    for (k, (trace, r, norm)) in results.iter().enumerate() {
        ctx.out.trace(&format!("trace_e2_{k}.csv"), trace)?;
        let cw = r.max_weiss_equal() / (h * h * norm * norm);
        let cl = r.max_lambda() / ((dtau * dtau + h * h) * norm);
        let inc = r.min_lambda_2m_increment() / (dtau * h * h * norm);
        c_weiss = c_weiss.max(cw);
        c_lambda = c_lambda.max(cl);
        worst_increment = worst_increment.min(inc);
        max_weiss2m = max_weiss2m.max(r.max_weiss2m() / (norm * norm));
        rows.push(vec![k as f64, *norm, cw, cl, inc, r.max_weiss2m()]);
    }
    ctx.out.csv(
        "residuals_2m.csv",
        &["run", "norm0", "weiss_equal_constant", "lambda_constant", "min_increment", "max_weiss2m"],
        &rows,
    )?;
    let ok = !rows.is_empty()
        && c_weiss <= p.weiss_equal_constant
        && c_lambda <= p.lambda_constant
        && worst_increment >= -p.increment_constant;
    ctx.check(
        Check::new(8, "evolution near 2m-profiles", ok, c_lambda, p.lambda_constant).with_detail(format!(
            "lambda residual / ((dtau^2 + h^2) |u|); energy split {c_weiss:.3e} (limit {:.1e}) in units of h^2 |u|^2, \
             min lambda_2m increment {worst_increment:.3e} dtau h^2 |u|, remainder energy residual {max_weiss2m:.3e} |u|^2",
            p.weiss_equal_constant
        )),
    );
    Ok(())
}

/// `W_2m(q) + |q|^2` for random `q` below degree `2m`.
fn below(ctx: &mut Context<'_>, p: &Decay2mParams, grid: &HalfSpaceGrid) -> Result<()> {
    let meas = GaussianMeasure::conformal(grid);
    let mut rows = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for &m in &p.below_orders {
        let kappa = 2.0 * m as f64;
        for k in 0..p.below_draws {
            let q = below_2m(grid, &mut ctx.rng, m)?;
            let norm_sq = inner_mu(&q, &q, &meas)?;
            let excess = weiss_energy(&q, kappa, &meas)? + norm_sq;
            worst = worst.max(excess);
            rows.push(vec![m as f64, k as f64, excess, norm_sq]);
        }
    }
    ctx.out.csv("below_2m.csv", &["m", "draw", "excess", "norm_sq"], &rows)?;
    ctx.check(
        Check::new(9, "energy bound below degree 2m", worst <= p.below_tol, worst, p.below_tol)
            .with_detail(format!(
                "max W_2m(q) + |q|^2 over {} unit draws; top-degree modes |alpha| = 2m - 1 give -|q|^2 / 2",
                rows.len()
            )),
    );
    Ok(())
}
