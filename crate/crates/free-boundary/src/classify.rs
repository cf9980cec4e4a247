use conformal_transform::OriginalSolution;
use rayon::prelude::*;
use serde::Serialize;

use crate::hcurve::{compute_h, Center, HCurve, HQuadrature};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Regular,
    Singular { m: usize },
    Unclassified,
}

/// Regular when `|kappa_fit - 3/2| < window/2`, singular of order `2m`
/// when `|kappa_fit - 2m| < window/2`.
pub fn classify_kappa(kappa_fit: f64, window: f64) -> Classification {
    let half = 0.5 * window;
    if (kappa_fit - 1.5).abs() < half {
        return Classification::Regular;
    }
    let m = (0.5 * kappa_fit).round();
    if m >= 1.0 && (kappa_fit - 2.0 * m).abs() < half {
        return Classification::Singular { m: m as usize };
    }
    Classification::Unclassified
}

/// Blow-up parameters of a regular point: the amplitude `c` and the
/// direction `e` of the limit `c Re(x'.e + i|x_n|)^{3/2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupParams {
    pub c: f64,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeBoundarySample {
    pub center: Center,
    pub curve: HCurve,
    pub classification: Classification,
    pub blowup: Option<BlowupParams>,
}

impl FreeBoundarySample {
    pub fn kappa_fit(&self) -> f64 {
        self.curve.kappa_fit
    }
}

pub fn classify(sample: &FreeBoundarySample, window: f64) -> Classification {
    classify_kappa(sample.curve.kappa_fit, window)
}

/// H-curves and classifications at several centers, computed in parallel.
pub fn sample_points<U: OriginalSolution + Sync + ?Sized>(
    u: &U,
    centers: &[Center],
    radii: &[f64],
    quad: &HQuadrature,
    window: f64,
) -> Result<Vec<FreeBoundarySample>> {
    centers
        .par_iter()
        .map(|c| {
            let curve = compute_h(u, c, radii, quad)?;
            Ok(FreeBoundarySample {
                center: c.clone(),
                classification: classify_kappa(curve.kappa_fit, window),
                curve,
                blowup: None,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows() {
        assert_eq!(classify_kappa(1.5, 0.2), Classification::Regular);
        assert_eq!(classify_kappa(1.58, 0.2), Classification::Regular);
        assert_eq!(classify_kappa(2.05, 0.2), Classification::Singular { m: 1 });
        assert_eq!(classify_kappa(3.95, 0.2), Classification::Singular { m: 2 });
        assert_eq!(classify_kappa(1.9, 0.2), Classification::Unclassified);
        assert_eq!(classify_kappa(0.2, 0.2), Classification::Unclassified);
        assert_eq!(classify_kappa(3.0, 0.2), Classification::Unclassified);
    }
}
