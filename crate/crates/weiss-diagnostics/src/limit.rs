use exact_solutions::HermiteElement;
use gaussian_calculus::{l2mu_norm, GaussianMeasure, WeightedField};

use crate::proj2m::{project_e2m, E2mBasis};
use crate::proj32::{project_e32, ProfileFamily};
use crate::trace::WeissTrace;
use crate::{DiagError, Result};

/// Which stationary family the limit is sought in.
pub enum LimitTarget<'a> {
    Regular(&'a dyn ProfileFamily),
    Singular(&'a E2mBasis),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LimitProfile {
    Regular {
        lambda: f64,
        angle: f64,
        direction: Vec<f64>,
    },
    Singular(HermiteElement),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub profile: LimitProfile,
    /// `|u(tau_last) - u(tau_last - 1 step)|`.
    pub final_increment: f64,
    /// `(tau, |v(tau)|^2)` from the trace rows.
    pub remainder_trend: Vec<(f64, f64)>,
    /// `(tau, |lambda(tau)^2 - lambda(inf)^2|)` for regular limits and
    /// `(tau, |u(inf)|^2 - |u(tau)|^2)` for singular ones.
    pub gap_trend: Vec<(f64, f64)>,
    /// `lambda(inf) > |u(0)| / 2`; regular limits only.
    pub nontrivial: Option<bool>,
}

/// Identify the limit from the last two snapshots and the trends recorded
/// in `trace`. Fails when the final increment exceeds `tol`.
pub fn limit_extraction(
    trace: &WeissTrace,
    snapshots: &[WeightedField],
    target: LimitTarget<'_>,
    m: &GaussianMeasure,
    tol: f64,
) -> Result<LimitReport> {
    let [.., before, last] = snapshots else {
        return Err(DiagError::TooShort("need the last two snapshots".into()));
    };
    let first = trace
        .rows()
        .first()
        .ok_or_else(|| DiagError::TooShort("empty trace".into()))?;
    let final_increment = l2mu_norm(&last.add_scaled(-1.0, before)?, m)?;
    if final_increment > tol {
        return Err(DiagError::NotConverged(final_increment));
    }
    let remainder_trend = trace
        .rows()
        .iter()
        .filter_map(|r| r.v_norm_sq.map(|v| (r.tau, v)))
        .collect();
    match target {
        LimitTarget::Regular(family) => {
            let dec = project_e32(last, family, m)?;
            let inf_sq = dec.lambda * dec.lambda;
            let gap_trend = trace
                .rows()
                .iter()
                .filter_map(|r| r.lambda.map(|l| (r.tau, (l * l - inf_sq).abs())))
                .collect();
            Ok(LimitReport {
                profile: LimitProfile::Regular {
                    lambda: dec.lambda,
                    angle: dec.angle,
                    direction: dec.direction,
                },
                final_increment,
                remainder_trend,
                gap_trend,
                nontrivial: Some(dec.lambda > 0.5 * first.norm_sq.sqrt()),
            })
        }
        LimitTarget::Singular(basis) => {
            let dec = project_e2m(last, basis, m)?;
            let terms = basis.indices().iter().cloned().zip(dec.coeffs).collect();
            let element = HermiteElement::new(last.grid().dim(), terms)?;
            let inf_sq = l2mu_norm(last, m)?.powi(2);
            let gap_trend = trace
                .rows()
                .iter()
                .map(|r| (r.tau, inf_sq - r.norm_sq))
                .collect();
            Ok(LimitReport {
                profile: LimitProfile::Singular(element),
                final_increment,
                remainder_trend,
                gap_trend,
                nontrivial: None,
            })
        }
    }
}
