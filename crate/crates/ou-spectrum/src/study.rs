use rayon::prelude::*;
use serde::Serialize;

use crate::problem::{assemble, solve_lowest, Symmetry};
use crate::{Result, SpectrumError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementRow {
    pub cells: usize,
    pub h: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementTable {
    pub rz: f64,
    pub rows: Vec<RefinementRow>,
    /// Richardson extrapolation of each eigenvalue from the two finest
    /// levels, assuming second order.
    pub extrapolated: Vec<f64>,
    /// `log2` of the ratio of successive differences over the three finest
    /// levels, per eigenvalue; `None` with fewer than three levels.
    pub observed_order: Option<Vec<f64>>,
}

/// Lowest `k` even eigenvalues on `cells`, `2 cells`, ... refinements,
/// computed concurrently.
pub fn refinement_study(rz: f64, cells: &[usize], k: usize) -> Result<RefinementTable> {
    if cells.len() < 2 || cells.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(SpectrumError::InvalidArgument(
            "refinement levels must double, two or more".into(),
        ));
    }
    let rows: Vec<RefinementRow> = cells
        .par_iter()
        .map(|&c| {
            let p = assemble(rz, c, Symmetry::Reduced)?;
            let s = solve_lowest(&p, k)?;
            Ok(RefinementRow {
                cells: c,
                h: p.spacing(),
                values: s.values,
            })
        })
        .collect::<Result<_>>()?;
    let l = rows.len();
    let extrapolated = (0..k)
        .map(|i| (4.0 * rows[l - 1].values[i] - rows[l - 2].values[i]) / 3.0)
        .collect();
    let observed_order = (l >= 3).then(|| {
        (0..k)
            .map(|i| {
                let d1 = rows[l - 3].values[i] - rows[l - 2].values[i];
                let d2 = rows[l - 2].values[i] - rows[l - 1].values[i];
                (d1 / d2).abs().log2()
            })
            .collect()
    });
    Ok(RefinementTable {
        rz,
        rows,
        extrapolated,
        observed_order,
    })
}
