use std::time::Instant;

use ou_spectrum::{assemble, refinement_study, residual_check_3d, solve_lowest, verify_eigenspace, Symmetry};
use serde::{Deserialize, Serialize};

use super::{require_positive, Context, Params};
use crate::report::Check;
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumParams {
    /// Half-width of the computational square in the unfolded variables.
    pub rz: f64,
    /// Cells per refinement level, coarse to fine.
    pub cells: Vec<usize>,
    /// Eigenvalues computed per level.
    pub count: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Relative tolerance of the two extrapolated eigenvalues.
    pub value_tol: f64,
    /// Relative tolerance of the gap `lambda2 - lambda1`.
    pub gap_tol: f64,
    /// No extrapolated eigenvalue may fall strictly inside this interval.
    pub empty: [f64; 2],
    pub min_correlation: f64,
    /// Eigenvalues closer than this count as a cluster.
    pub cluster_gap: f64,
    pub runtime_limit_s: f64,
    /// Finite-difference step of the three-dimensional residual report.
    pub residual_h: f64,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        Self {
            rz: 2.2,
            cells: vec![20, 40, 80],
            count: 3,
            lambda1: 0.5,
            lambda2: 1.5,
            value_tol: 5e-3,
            gap_tol: 1e-2,
            empty: [0.55, 1.45],
            min_correlation: 0.999,
            cluster_gap: 0.05,
            runtime_limit_s: 300.0,
            residual_h: 0.025,
        }
    }
}

impl Params for SpectrumParams {
    fn validate(&self) -> Result<()> {
        require_positive(
            "spectrum parameters",
            &[
                self.rz,
                self.value_tol,
                self.gap_tol,
                self.min_correlation,
                self.cluster_gap,
                self.runtime_limit_s,
                self.residual_h,
            ],
        )?;
        if self.cells.len() < 2 || self.cells.contains(&0) {
            return Err(super::bad_param("need at least two positive refinement levels"));
        }
        if self.count < 2 {
            return Err(super::bad_param("need at least two eigenvalues"));
        }
        Ok(())
    }
}

pub(super) fn run(ctx: &mut Context<'_>) -> Result<()> {
    let p: SpectrumParams = ctx.params()?;
    let start = Instant::now();
    let table = refinement_study(p.rz, &p.cells, p.count)?;
    let finest = *p.cells.iter().max().expect("validated");
    let problem = assemble(p.rz, finest, Symmetry::Reduced)?;
    let spectrum = solve_lowest(&problem, p.count)?;
    let span = verify_eigenspace(&problem, &spectrum, p.cluster_gap);
    let seconds = start.elapsed().as_secs_f64();

    let mut header = vec!["cells".to_string(), "h".to_string()];
    header.extend((1..=p.count).map(|k| format!("lambda_{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.cells as f64, r.h];
            row.extend(&r.values);
            row
        })
        .collect();
    ctx.out.csv("eigen_convergence.csv", &header, &rows)?;
    ctx.out.json("refinement.json", &table)?;
    let residual = residual_check_3d(p.residual_h, 1.0, 0.2);
    ctx.out.json("residual_3d.json", &residual)?;

    let ext = &table.extrapolated;
    let (l1, l2) = (ext[0], ext[1]);
    let err1 = (l1 - p.lambda1).abs() / p.lambda1;
    let err2 = (l2 - p.lambda2).abs() / p.lambda2;
    let gap = p.lambda2 - p.lambda1;
    let gap_err = ((l2 - l1) - gap).abs() / gap;
    let intruders: Vec<f64> = ext.iter().copied().filter(|v| *v > p.empty[0] && *v < p.empty[1]).collect();
    let mut ok = err1 <= p.value_tol
        && err2 <= p.value_tol
        && gap_err <= p.gap_tol
        && intruders.is_empty()
        && seconds <= p.runtime_limit_s;
    let span_note = match &span {
        Ok(s) => {
            ctx.out.json("eigenspace.json", s)?;
            ok &= s.second_correlation >= p.min_correlation;
            format!("second-mode correlation {:.5}", s.second_correlation)
        }
        Err(e) => {
            ok = false;
            format!("eigenspace check failed: {e}")
        }
    };
    let mut detail = format!(
        "max relative error of lambda1, lambda2; extrapolated {l1:.5}, {l2:.5}, gap error {gap_err:.2e}, {span_note}, \
         3d residuals {:.1e} / {:.1e}",
        residual.profile, residual.tilted
    );
    if !intruders.is_empty() {
        detail.push_str(&format!("; eigenvalues inside the gap: {intruders:?}"));
    }
    detail.push_str(&ctx.timing_note("runtime", seconds));
    ctx.check(Check::new(12, "spectral gap of the slit problem", ok, err1.max(err2), p.value_tol).with_detail(detail));
    Ok(())
}
