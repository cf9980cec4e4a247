use conformal_transform::{ConformalTrajectory, FnSolution, OriginalSolution};
use exact_solutions::{eval_profile32, H2m, Profile32};
use free_boundary::{
    classify_kappa, compute_h, dyadic_radii, extract_contact, reconstruct_graph, Axis, BoundaryTimeField,
    Center, Classification, GraphReport, GraphWindow, HQuadrature,
};
use gaussian_calculus::{GaussianMeasure, HalfSpaceGrid, WeightedField};
use serde::{Deserialize, Serialize};
use signorini_solver::solve_trajectory;
use weiss_diagnostics::Monitor;

use super::{profile_constant, require_positive, Context, Params};
use crate::recipe::{clip_trace, windowed_hermite};
use crate::report::Check;
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularFbParams {
    /// Quadrature of the H-curves (two dimensions).
    pub h_radius: f64,
    pub h_spacing: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Allowed relative deviation of the slope from `2 kappa`.
    pub slope_tol: f64,
    pub classify_window: f64,
    /// Angles of the tilted free boundaries in three dimensions.
    pub tilts: Vec<f64>,
    /// Boundary slab `[-slab, slab]^2` with `slab_points` per axis.
    pub slab: f64,
    pub slab_points: usize,
    pub times: Vec<f64>,
    pub window_x1: [f64; 2],
    pub window_t: [f64; 2],
    /// Sampling times and window of the perturbed solution, taken after
    /// the flow has smoothed the clipped initial data.
    pub perturbed_times: Vec<f64>,
    pub perturbed_window_t: [f64; 2],
    /// Contact threshold of the perturbed solution.
    pub threshold: f64,
}

impl Default for RegularFbParams {
    fn default() -> Self {
        Self {
            h_radius: 5.0,
            h_spacing: 0.05,
            r_min: 1e-3,
            r_max: 1.0,
            slope_tol: 1e-2,
            classify_window: 0.2,
            tilts: vec![0.2, -0.4, 0.6],
            slab: 1.0,
            slab_points: 41,
            times: vec![-1.0, -0.75, -0.5],
            window_x1: [-0.5, 0.5],
            window_t: [-1.0, -0.5],
            perturbed_times: vec![-0.2, -0.15, -0.1],
            perturbed_window_t: [-0.2, -0.1],
            threshold: 1e-9,
        }
    }
}

impl Params for RegularFbParams {
    fn validate(&self) -> Result<()> {
        require_positive(
            "regular-fb parameters",
            &[
                self.h_radius,
                self.h_spacing,
                self.r_min,
                self.r_max,
                self.slope_tol,
                self.classify_window,
                self.slab,
                self.threshold,
            ],
        )?;
        if self.r_min >= self.r_max {
            return Err(super::bad_param("need r_min < r_max"));
        }
        let times = self.times.iter().chain(&self.perturbed_times);
        if self.slab_points < 3 || self.times.is_empty() || self.perturbed_times.is_empty() || times.clone().any(|t| *t >= 0.0) {
            return Err(super::bad_param("slab needs 3 points per axis and negative times"));
        }
        Ok(())
    }
}

/// The time-independent extension of a stationary profile of homogeneity
/// `kappa`: `(-t)^{kappa/2} p(x / (2 sqrt(-t)))`.
fn extension<P>(n: usize, kappa: f64, p: P) -> impl OriginalSolution
where
    P: Fn(&[f64]) -> f64,
{
    FnSolution::new(n, move |x: &[f64], t: f64| {
        let s = (-t).sqrt();
        let y: Vec<f64> = x.iter().map(|v| v / (2.0 * s)).collect();
        s.powf(kappa) * p(&y)
    })
}

pub(super) fn run(ctx: &mut Context<'_>) -> Result<()> {
    let p: RegularFbParams = ctx.params()?;
    classification(ctx, &p)?;
    graphs(ctx, &p)?;
    Ok(())
}

fn classification(ctx: &mut Context<'_>, p: &RegularFbParams) -> Result<()> {
    let quad = HQuadrature::new(2, p.h_radius, p.h_spacing)?;
    let radii = dyadic_radii(p.r_min, p.r_max)?;
    let he = Profile32::new(1.0, &[1.0], profile_constant(2)?)?;
    let h2 = H2m::reference(1, 2)?;
    let cases: [(&str, f64, Classification, Box<dyn OriginalSolution>); 2] = [
        ("regular", 1.5, Classification::Regular, Box::new(extension(2, 1.5, move |y| he.value(y)))),
        ("singular", 2.0, Classification::Singular { m: 1 }, Box::new(extension(2, 2.0, move |y| h2.value(y)))),
    ];
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (name, kappa, expected, u) in &cases {
        let curve = compute_h(u.as_ref(), &Center::origin(2), &radii, &quad)?;
        let rows: Vec<Vec<f64>> = curve.radii.iter().zip(&curve.values).map(|(r, h)| vec![*r, *h]).collect();
        ctx.out.csv(&format!("hcurve_{name}.csv"), &["r", "h"], &rows)?;
        let err = (curve.slope - 2.0 * kappa).abs() / (2.0 * kappa);
        let class = classify_kappa(curve.kappa_fit, p.classify_window);
        worst = worst.max(err);
        ok &= err <= p.slope_tol && class == *expected;
        notes.push(format!("{name}: slope {:.5} ({class:?})", curve.slope));
    }
    ctx.check(
        Check::new(11, "H-curve classification", ok, worst, p.slope_tol)
            .with_detail(format!("max relative slope error against 2 kappa; {}", notes.join(", "))),
    );
    Ok(())
}

fn slab_field<U: OriginalSolution + ?Sized>(u: &U, p: &RegularFbParams, times: &[f64]) -> Result<BoundaryTimeField> {
    let axis = Axis::span(-p.slab, p.slab, p.slab_points)?;
    Ok(BoundaryTimeField::sample(u, vec![axis, axis], times.to_vec())?)
}

fn graph_rows(r: &GraphReport) -> Vec<Vec<f64>> {
    r.samples.iter().map(|s| vec![s.x1, s.t, s.g, s.dg]).collect()
}

fn graphs(ctx: &mut Context<'_>, p: &RegularFbParams) -> Result<()> {
    let window = GraphWindow {
        x1: p.window_x1,
        t: p.window_t,
    };
    let spacing = 2.0 * p.slab / (p.slab_points - 1) as f64;
    let half_width = 0.5 * (p.window_x1[1] - p.window_x1[0]);
    let angle_tol = spacing / half_width;
    let c3 = profile_constant(3)?;
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    let mut tilt_rows = Vec::new();
    for &phi in &p.tilts {
        let prof = Profile32::new(1.0, &[-phi.sin(), phi.cos()], c3)?;
        let u = extension(3, 1.5, move |y| prof.value(y));
        let contact = extract_contact(&slab_field(&u, p, &p.times)?, p.threshold)?;
        match reconstruct_graph(&contact, window) {
            Ok(r) => {
                let err = (r.mean_slope.atan() - phi).abs();
                worst = worst.max(err);
                ok &= err <= angle_tol;
                tilt_rows.push(vec![phi, r.mean_slope.atan(), err]);
            }
            Err(e) => {
                ok = false;
                notes.push(format!("tilt {phi}: {e}"));
            }
        }
    }
    ctx.out.csv("tilts.csv", &["phi", "recovered", "error"], &tilt_rows)?;

    // A perturbed regular solution, evolved by the scheme and read back in
    // original coordinates.
    let grid = ctx.grid()?;
    let u0 = perturbed_he(ctx, &grid, c3)?;
    // Long enough to reach the latest sampling time.
    let t_last = p.perturbed_times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tau_max = conformal_transform::tau_of(t_last).max(ctx.cfg.solver.tau_max);
    let scfg = ctx.solver_config(1.5, ctx.cfg.solver.dtau, tau_max)?;
    let t = solve_trajectory(&u0, &scfg, &Monitor::Plain)?;
    ctx.out.trace("trace_perturbed.csv", &t.trace)?;
    let fields: Vec<WeightedField> = t.snapshots.into_iter().map(|s| s.field).collect();
    let traj = ConformalTrajectory::new(1.5, fields)?;
    let contact = extract_contact(&slab_field(&traj, p, &p.perturbed_times)?, p.threshold)?;
    let late = GraphWindow {
        x1: p.window_x1,
        t: p.perturbed_window_t,
    };
    match reconstruct_graph(&contact, late) {
        Ok(r) => {
            ctx.out.csv("graph.csv", &["x1", "t", "g", "dg"], &graph_rows(&r))?;
            let holder: Vec<Vec<f64>> = r.holder.iter().map(|h| vec![h.theta, h.quotient]).collect();
            ctx.out.csv("holder.csv", &["theta", "quotient"], &holder)?;
            notes.push(format!(
                "perturbed: graph over {} samples, theta_hat {:.2}, mean slope {:.3e}",
                r.samples.len(),
                r.theta_hat,
                r.mean_slope
            ));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("perturbed: {e}"));
        }
    }
    ctx.check(
        Check::new(15, "free boundary as a graph", ok, worst, angle_tol)
            .with_detail(format!("max tilt angle error (one cell over the half-width); {}", notes.join("; "))),
    );
    Ok(())
}

/// `h_{e_2}` plus windowed Hermite noise of relative size
/// `data.perturbation`, trace clipped.
fn perturbed_he(ctx: &mut Context<'_>, grid: &HalfSpaceGrid, c3: f64) -> Result<WeightedField> {
    let m = GaussianMeasure::conformal(grid);
    let he = eval_profile32(&Profile32::new(1.0, &[0.0, 1.0], c3)?, grid)?;
    let noise = windowed_hermite(grid, &mut ctx.rng)?;
    let scale = ctx.cfg.data.perturbation * gaussian_calculus::l2mu_norm(&he, &m)?
        / gaussian_calculus::l2mu_norm(&noise, &m)?;
    let mut u = he.add_scaled(scale, &noise)?;
    clip_trace(&mut u);
    Ok(u)
}
