use free_boundary::{frequency_gap_experiment, log_grid, GapConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use signorini_solver::solve_trajectory;
use weiss_diagnostics::{epiperimetric_check, EpiVariant, Monitor};

use super::{require_positive, Context, Params};
use crate::recipe::e2m_above;
use crate::report::Check;
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrequencyGapParams {
    pub m: usize,
    pub epsilons: Vec<f64>,
    /// Allowed relative deviation of the eigen-run energies.
    pub rel_tol: f64,
    /// Length of the runs that measure the logarithmic constant.
    pub measure_tau: f64,
    /// Energies below this count as zero in the unit-time pairs.
    pub zero_tol: f64,
    pub scan_lo: f64,
    pub scan_hi: f64,
    pub scan_points: usize,
    /// The inequality must fail on the whole scan up to this value.
    pub min_excluded: f64,
}

impl Default for FrequencyGapParams {
    fn default() -> Self {
        Self {
            m: 1,
            epsilons: vec![0.1, 0.3, 0.5],
            rel_tol: 1e-2,
            measure_tau: 3.0,
            zero_tol: 1e-14,
            scan_lo: 1e-12,
            scan_hi: 1e-3,
            scan_points: 19,
            min_excluded: 1e-3,
        }
    }
}

impl Params for FrequencyGapParams {
    fn validate(&self) -> Result<()> {
        require_positive("epsilons", &self.epsilons)?;
        require_positive(
            "frequency-gap parameters",
            &[self.rel_tol, self.measure_tau, self.zero_tol, self.scan_lo, self.scan_hi, self.min_excluded],
        )?;
        if self.m == 0 {
            return Err(super::bad_param("m must be at least 1"));
        }
        if self.scan_lo >= self.scan_hi || self.scan_points < 2 {
            return Err(super::bad_param("scan needs lo < hi and two points"));
        }
        Ok(())
    }
}

pub(super) fn run(ctx: &mut Context<'_>) -> Result<()> {
    let p: FrequencyGapParams = ctx.params()?;
    let grid = ctx.grid()?;
    let kappa = 2.0 * p.m as f64;

    // The logarithmic constant, measured on data above 2m.
    let data: Vec<_> = (0..ctx.cfg.data.runs.max(1))
        .map(|_| e2m_above(&grid, &mut ctx.rng, p.m, ctx.cfg.data.perturbation))
        .collect::<Result<_>>()?;
    let scfg = ctx.solver_config(kappa, ctx.cfg.solver.dtau, p.measure_tau)?;
    let traces: Vec<_> = data
        .par_iter()
        .map(|u0| Ok(solve_trajectory(u0, &scfg, &Monitor::Plain)?.trace))
        .collect::<Result<_>>()?;
    let mut c0 = f64::INFINITY;
    let mut problems = Vec::new();
    let mut c0_rows = Vec::new();
    for (k, t) in traces.iter().enumerate() {
        ctx.out.trace(&format!("trace_measure_{k}.csv"), t)?;
        match epiperimetric_check(t, EpiVariant::Logarithmic, p.zero_tol) {
            Ok(r) => match r.min_c0 {
                Some(c) => {
                    c0 = c0.min(c);
                    c0_rows.push(vec![k as f64, c, t.rows()[0].weiss]);
                }
                None => problems.push(format!("run {k}: degenerate energy")),
            },
            Err(e) => problems.push(format!("run {k}: {e}")),
        }
    }
    ctx.out.csv("c0.csv", &["run", "c0", "w0"], &c0_rows)?;
    if !(c0 > 0.0 && c0.is_finite()) {
        let detail = format!("no positive logarithmic constant: c0 = {c0:.3e}; {}", problems.join("; "));
        ctx.check(Check::new(10, "frequency gap at 2m", false, f64::NAN, p.rel_tol).with_detail(detail));
        return Ok(());
    }

    let table = frequency_gap_experiment(
        &grid,
        &GapConfig {
            m: p.m,
            epsilons: p.epsilons.clone(),
            dtau: ctx.cfg.solver.dtau,
            tau_max: ctx.cfg.solver.tau_max,
            c0,
            scan: log_grid(p.scan_lo, p.scan_hi, p.scan_points),
        },
    )?;
    ctx.out.json("gap_table.json", &table)?;
    let rows: Vec<Vec<f64>> = table
        .rows
        .iter()
        .map(|r| {
            let side = match r.side {
                free_boundary::GapSide::Above => 1.0,
                free_boundary::GapSide::Below => -1.0,
            };
            vec![r.epsilon, side, r.kappa, r.max_rel_error]
        })
        .collect();
    ctx.out.csv("gap.csv", &["epsilon", "side", "kappa", "max_rel_error"], &rows)?;

    let worst = table.rows.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
    let excluded = table.excluded_up_to.unwrap_or(0.0);
    let ok = problems.is_empty() && worst <= p.rel_tol && excluded >= p.min_excluded;
    let mut detail = format!(
        "max relative energy error of the eigen-runs; c0 {c0:.3e}, excluded up to {excluded:.1e} (need {:.1e})",
        p.min_excluded
    );
    if !problems.is_empty() {
        detail = format!("{detail}; {}", problems.join("; "));
    }
    ctx.check(Check::new(10, "frequency gap at 2m", ok, worst, p.rel_tol).with_detail(detail));
    Ok(())
}
