use gaussian_calculus::{l2mu_norm, normal_derivative, GaussianMeasure, WeightedField};
use weiss_diagnostics::{Monitor, Snapshot, WeissTrace};

use crate::config::SolverConfig;
use crate::solver::{Solver, SolverState};
use crate::{Result, SolverError};

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// States at `tau = 0` and every `snapshot_stride`-th step, plus the
    /// final state.
    pub snapshots: Vec<Snapshot>,
    /// One row per step.
    pub trace: WeissTrace,
    /// Largest sweep count of the boundary iteration.
    pub max_sweeps: usize,
    /// Smallest trace value seen along the run.
    pub min_trace: f64,
}

fn snapshot(s: &SolverState) -> Snapshot {
    Snapshot {
        field: s.field.clone(),
        normal_derivative: s.normal_derivative.clone(),
    }
}

/// Run the solver from `initial` to `tau_max` of the configured frame,
/// recording a trace row per step through `monitor`.
pub fn solve_trajectory(
    initial: &WeightedField,
    cfg: &SolverConfig,
    monitor: &Monitor,
) -> Result<Trajectory> {
    let solver = Solver::new(initial.grid(), cfg.clone())?;
    run(&solver, initial, monitor)
}

/// As [`solve_trajectory`] with an already factored solver.
pub fn run(solver: &Solver, initial: &WeightedField, monitor: &Monitor) -> Result<Trajectory> {
    let cfg = solver.config();
    let m = solver.operator().measure();
    let bound = match &cfg.forcing {
        Some(f) => Some(f.bound(m, &cfg.frame)?),
        None => None,
    };
    let mut state = solver.initial_state(initial)?;
    let mut trace = monitor.new_trace(cfg.kappa());
    trace.push(monitor.row(&state.field, cfg.kappa(), m, 0.0, bound)?)?;
    let mut snapshots = vec![snapshot(&state)];
    let mut max_sweeps = 0;
    let mut min_trace = state.min_trace();
    let steps = cfg.frame.steps();
    for k in 1..=steps {
        state = solver.step(&state)?;
        max_sweeps = max_sweeps.max(state.sweeps);
        min_trace = min_trace.min(state.min_trace());
        trace.push(monitor.row(&state.field, cfg.kappa(), m, state.dissipation, bound)?)?;
        if k % cfg.snapshot_stride == 0 || k == steps {
            snapshots.push(snapshot(&state));
        }
    }
    Ok(Trajectory {
        snapshots,
        trace,
        max_sweeps,
        min_trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    /// `(tau, |u_pen - u_proj|)` at every step.
    pub discrepancy: Vec<(f64, f64)>,
    pub max_discrepancy: f64,
}

/// Run both schemes from the same data and compare them step by step.
pub fn cross_validate(
    initial: &WeightedField,
    cfg_pen: &SolverConfig,
    cfg_proj: &SolverConfig,
) -> Result<CrossValidation> {
    if (cfg_pen.dtau() - cfg_proj.dtau()).abs() > 1e-15
        || (cfg_pen.kappa() - cfg_proj.kappa()).abs() > 1e-15
        || cfg_pen.frame.steps() != cfg_proj.frame.steps()
    {
        return Err(SolverError::InvalidConfig(
            "cross-validation needs identical time grids and kappa".into(),
        ));
    }
    let pen = Solver::new(initial.grid(), cfg_pen.clone())?;
    let proj = Solver::new(initial.grid(), cfg_proj.clone())?;
    let m = pen.operator().measure();
    let mut a = pen.initial_state(initial)?;
    let mut b = proj.initial_state(initial)?;
    let mut discrepancy = Vec::new();
    let mut max_discrepancy = 0.0f64;
    for _ in 0..cfg_pen.frame.steps() {
        a = pen.step(&a)?;
        b = proj.step(&b)?;
        let d = l2mu_norm(&a.field.add_scaled(-1.0, &b.field)?, m)?;
        max_discrepancy = max_discrepancy.max(d);
        discrepancy.push((a.tau(), d));
    }
    Ok(CrossValidation {
        discrepancy,
        max_discrepancy,
    })
}

/// Nodewise violations of `u >= 0`, `d_n u <= 0`, `u d_n u = 0` on the
/// layer `y_n = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complementarity {
    pub negativity: f64,
    pub positive_flux: f64,
    pub product: f64,
}

/// Complementarity residuals of `u` with the given boundary normal
/// derivative, over every node of the layer `y_n = 0`.
pub fn residual_complementarity(u: &WeightedField, dn: &[f64]) -> Result<Complementarity> {
    let g = u.grid();
    if dn.len() != g.boundary_len() {
        return Err(SolverError::GridMismatch);
    }
    let trace = u.boundary_trace();
    let mut out = Complementarity {
        negativity: 0.0,
        positive_flux: 0.0,
        product: 0.0,
    };
    for (v, d) in trace.iter().zip(dn) {
        out.negativity = out.negativity.max(-v);
        out.positive_flux = out.positive_flux.max(*d);
        out.product = out.product.max((v * d).abs());
    }
    Ok(out)
}

/// Complementarity residuals of a field alone, with `d_n u` from the
/// one-sided difference stencil of the calculus layer.
pub fn field_complementarity(u: &WeightedField) -> Result<Complementarity> {
    let dn = normal_derivative(u)?;
    residual_complementarity(u, &dn)
}

/// `|u(tau) - u(0)|` for every snapshot.
pub fn drift(snapshots: &[Snapshot], m: &GaussianMeasure) -> Result<Vec<(f64, f64)>> {
    let Some(first) = snapshots.first() else {
        return Ok(Vec::new());
    };
    snapshots
        .iter()
        .map(|s| {
            let d = l2mu_norm(&s.field.add_scaled(-1.0, &first.field)?, m)?;
            Ok((s.field.time(), d))
        })
        .collect()
}
