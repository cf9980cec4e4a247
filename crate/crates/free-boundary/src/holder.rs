use serde::Serialize;

use crate::classify::FreeBoundarySample;
use crate::graph::holder_quotients;
use crate::{FbError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderMapRow {
    pub theta: f64,
    pub c_quotient: f64,
    pub e_quotient: f64,
}

/// Hölder quotients of `center -> c` and `center -> e` over all pairs of
/// samples that carry blow-up parameters.
pub fn holder_maps(samples: &[FreeBoundarySample], thetas: &[f64]) -> Result<Vec<HolderMapRow>> {
    let with: Vec<_> = samples
        .iter()
        .filter_map(|s| s.blowup.as_ref().map(|b| (s, b)))
        .collect();
    if with.len() < 2 {
        return Err(FbError::TooFewSamples {
            needed: 2,
            got: with.len(),
        });
    }
    let points: Vec<(Vec<f64>, f64)> = with.iter().map(|(s, _)| (s.center.x.clone(), s.center.t)).collect();
    let cs: Vec<Vec<f64>> = with.iter().map(|(_, b)| vec![b.c]).collect();
    let es: Vec<Vec<f64>> = with.iter().map(|(_, b)| b.direction.clone()).collect();
    let qc = holder_quotients(&points, &cs, thetas);
    let qe = holder_quotients(&points, &es, thetas);
    Ok(qc
        .into_iter()
        .zip(qe)
        .map(|(c, e)| HolderMapRow {
            theta: c.theta,
            c_quotient: c.quotient,
            e_quotient: e.quotient,
        })
        .collect())
}
