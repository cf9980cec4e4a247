use conformal_transform::{rescale, to_selfsimilar, OriginalSolution};
use gaussian_calculus::{l2mu_norm, GaussianMeasure};
use serde::Serialize;
use weiss_diagnostics::{project_e32, ProfileFamily};

use crate::classify::BlowupParams;
use crate::hcurve::{Center, Translated};
use crate::{FbError, Result};

/// Checks that the parabolic neighborhood of `center` of size `probe`
/// holds both contact (`|u| <= threshold`) and positivity on the
/// boundary: the center itself and its neighbors `x0 +- probe e_i` at time
/// `t0 - probe^2` are sampled.
pub fn on_free_boundary<U: OriginalSolution + ?Sized>(
    u: &U,
    center: &Center,
    probe: f64,
    threshold: f64,
) -> Result<bool> {
    let n = u.dim();
    let t = center.t - probe * probe;
    let mut points = vec![center.x.clone()];
    for a in 0..n - 1 {
        for s in [-1.0, 1.0] {
            let mut x = center.x.clone();
            x[a] += s * probe;
            points.push(x);
        }
    }
    let (mut zero, mut positive) = (false, false);
    for x in points {
        let v = u.eval(&x, t).ok_or_else(|| FbError::OutsideData { x: x.clone(), t })?;
        if v.abs() <= threshold {
            zero = true;
        } else if v > 0.0 {
            positive = true;
        }
    }
    Ok(zero && positive)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupEntry {
    pub lambda: f64,
    pub c: f64,
    pub angle: f64,
    pub direction: Vec<f64>,
    /// `|u~_lambda - c_last h_{e_last}|` in `L^2_mu` at unit time.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    pub entries: Vec<BlowupEntry>,
    /// Parameters at the smallest `lambda`.
    pub limit: BlowupParams,
    /// Change of `(c, e)` between the last two scales.
    pub final_change: f64,
    pub stabilized: bool,
    /// Least-squares slope of `ln distance` against `ln lambda` over all
    /// but the last scale; `None` when fewer than two distances are
    /// positive.
    pub rate_exponent: Option<f64>,
}

/// Parameters of blow-up settings.
pub struct BlowupSetup<'a> {
    pub kappa: f64,
    pub family: &'a dyn ProfileFamily,
    /// Probe radius of the free boundary check.
    pub probe: f64,
    pub threshold: f64,
    /// Largest change of `(c, e)` over the last two scales that counts as
    /// stabilized.
    pub tol: f64,
}

/// Rescale `u` at `center` by each `lambda`, read the rescaling at
/// `t = -1` in self-similar variables, and project it onto the cone of
/// 3/2-profiles. Since `u_lambda(., -1)` is the conformal solution at
/// `tau = -2 ln lambda`, decreasing `lambda` walks along the conformal
/// trajectory towards its limit.
pub fn blowup<U: OriginalSolution + ?Sized>(
    u: &U,
    center: &Center,
    lambdas: &[f64],
    setup: &BlowupSetup<'_>,
) -> Result<BlowupReport> {
    if lambdas.len() < 2 || lambdas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(FbError::InvalidArgument(
            "need two or more decreasing scales".into(),
        ));
    }
    if !on_free_boundary(u, center, setup.probe, setup.threshold)? {
        return Err(FbError::OffFreeBoundary {
            x: center.x.clone(),
            t: center.t,
        });
    }
    let grid = setup.family.grid();
    let m = GaussianMeasure::conformal(grid);
    let shifted = Translated::new(u, center)?;
    let mut fields = Vec::with_capacity(lambdas.len());
    let mut decs = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let r = rescale(&shifted, lambda, setup.kappa)?;
        let f = to_selfsimilar(&r, setup.kappa, -1.0, grid)?;
        decs.push(project_e32(&f, setup.family, &m)?);
        fields.push(f);
    }
    let last = decs.last().expect("two or more scales");
    let limit_field = last.profile.scaled(last.lambda);
    let mut entries = Vec::with_capacity(lambdas.len());
    for ((lambda, f), d) in lambdas.iter().zip(&fields).zip(&decs) {
        entries.push(BlowupEntry {
            lambda: *lambda,
            c: d.lambda,
            angle: d.angle,
            direction: d.direction.clone(),
            distance: l2mu_norm(&f.add_scaled(-1.0, &limit_field)?, &m)?,
        });
    }
    let k = entries.len();
    let change = |a: &BlowupEntry, b: &BlowupEntry| {
        let de: f64 = a
            .direction
            .iter()
            .zip(&b.direction)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        (a.c - b.c).abs() + de
    };
    let final_change = change(&entries[k - 2], &entries[k - 1]);
    let pts: Vec<(f64, f64)> = entries[..k - 1]
        .iter()
        .filter(|e| e.distance > 0.0)
        .map(|e| (e.lambda.ln(), e.distance.ln()))
        .collect();
    let rate_exponent = (pts.len() >= 2).then(|| {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(BlowupReport {
        limit: BlowupParams {
            c: last.lambda,
            direction: last.direction.clone(),
        },
        entries,
        final_change,
        stabilized: final_change <= setup.tol,
        rate_exponent,
    })
}
