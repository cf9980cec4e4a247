use std::time::Instant;

use gaussian_calculus::{make_grid, GaussianMeasure, HalfSpaceGrid, WeightedField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use signorini_solver::{drift, solve_trajectory};
use weiss_diagnostics::{Monitor, WeissTrace};

use super::{require_positive, sampled_he, tenth_stride, Context, Params};
use crate::recipe::unit_h2m;
use crate::report::Check;
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StationarityParams {
    /// `C` in the drift bound `C (h^{3/2} + dtau)`.
    pub bound_constant: f64,
    /// The coarse level uses `factor * h` and `factor * dtau`.
    pub refinement_factor: f64,
    /// Required drift reduction from the coarse to the fine level.
    pub halving: f64,
    /// Drifts below this are roundoff and exempt from the reduction test.
    pub roundoff_floor: f64,
    pub runtime_limit_s: f64,
}

impl Default for StationarityParams {
    fn default() -> Self {
        Self {
            bound_constant: 5.0,
            refinement_factor: 2.0,
            halving: 0.5,
            roundoff_floor: 1e-10,
            runtime_limit_s: 120.0,
        }
    }
}

impl Params for StationarityParams {
    fn validate(&self) -> Result<()> {
        require_positive(
            "stationarity parameters",
            &[self.bound_constant, self.halving, self.roundoff_floor, self.runtime_limit_s],
        )?;
        if self.refinement_factor <= 1.0 {
            return Err(super::bad_param("refinement_factor must exceed 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Family {
    /// `h_e` at `kappa = 3/2`.
    Regular,
    /// `h_2` at `kappa = 2`.
    Singular,
}

impl Family {
    fn label(self) -> &'static str {
        match self {
            Family::Regular => "he",
            Family::Singular => "h2",
        }
    }

    fn kappa(self) -> f64 {
        match self {
            Family::Regular => 1.5,
            Family::Singular => 2.0,
        }
    }

    fn data(self, grid: &HalfSpaceGrid) -> Result<WeightedField> {
        Ok(match self {
            Family::Regular => sampled_he(grid)?,
            Family::Singular => unit_h2m(grid, 1)?,
        })
    }
}

struct Outcome {
    family: Family,
    level: &'static str,
    h: f64,
    dtau: f64,
    bound: f64,
    drift: Vec<(f64, f64)>,
    trace: WeissTrace,
    seconds: f64,
}

impl Outcome {
    fn max_drift(&self) -> f64 {
        self.drift.iter().map(|d| d.1).fold(0.0, f64::max)
    }
}

pub(super) fn run(ctx: &mut Context<'_>) -> Result<()> {
    let p: StationarityParams = ctx.params()?;
    let cfg = ctx.cfg;
    let (h, dtau) = (cfg.grid.h, cfg.solver.dtau);
    let mut jobs = Vec::new();
    for family in [Family::Regular, Family::Singular] {
        jobs.push((family, "fine", h, dtau));
        jobs.push((family, "coarse", p.refinement_factor * h, p.refinement_factor * dtau));
    }
    let mut settings = Vec::new();
    for &(family, _, h, dtau) in &jobs {
        let mut s = ctx.solver_config(family.kappa(), dtau, cfg.solver.tau_max)?;
        s.snapshot_stride = tenth_stride(dtau);
        settings.push((make_grid(cfg.grid.n, cfg.grid.radius, h)?, s));
    }
    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .zip(settings.par_iter())
        .map(|(&(family, level, h, dtau), (grid, scfg))| {
            let start = Instant::now();
            let u0 = family.data(grid)?;
            let t = solve_trajectory(&u0, scfg, &Monitor::Plain)?;
            let m = GaussianMeasure::conformal(grid);
            Ok(Outcome {
                family,
                level,
                h,
                dtau,
                bound: p.bound_constant * (h.powf(1.5) + dtau),
                drift: drift(&t.snapshots, &m)?,
                trace: t.trace,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;

    let mut summary = Vec::new();
    for o in &outcomes {
        let name = format!("{}_{}", o.family.label(), o.level);
        ctx.out.trace(&format!("trace_{name}.csv"), &o.trace)?;
        let rows: Vec<Vec<f64>> = o.drift.iter().map(|(t, d)| vec![*t, *d, o.bound]).collect();
        ctx.out.csv(&format!("drift_{name}.csv"), &["tau", "drift", "bound"], &rows)?;
        summary.push(vec![o.family.kappa(), o.h, o.dtau, o.max_drift(), o.bound]);
    }
    ctx.out.csv("drift_summary.csv", &["kappa", "h", "dtau", "max_drift", "bound"], &summary)?;

    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    let mut notes = Vec::new();
    let mut slowest = 0.0f64;
    for family in [Family::Regular, Family::Singular] {
        let of = |level: &str| {
            outcomes
                .iter()
                .find(|o| o.family == family && o.level == level)
                .expect("both levels ran")
        };
        let (fine, coarse) = (of("fine"), of("coarse"));
        for o in [fine, coarse] {
            worst_ratio = worst_ratio.max(o.max_drift() / o.bound);
            ok &= o.max_drift() <= o.bound;
        }
        let reduced = fine.max_drift() <= p.halving * coarse.max_drift()
            || coarse.max_drift() <= p.roundoff_floor;
        ok &= reduced;
        slowest = slowest.max(fine.seconds);
        notes.push(format!(
            "{}: drift {:.3e} -> {:.3e} (bound {:.3e} -> {:.3e})",
            family.label(),
            coarse.max_drift(),
            fine.max_drift(),
            coarse.bound,
            fine.bound
        ));
    }
    ok &= slowest <= p.runtime_limit_s;
    let detail = notes.join(", ") + &ctx.timing_note("slowest fine run", slowest);
    ctx.check(
        Check::new(1, "stationarity of classified profiles", ok, worst_ratio, 1.0)
            .with_detail(format!("max drift / bound; {detail}")),
    );
    Ok(())
}
