use gaussian_calculus::{l2mu_norm, GaussianMeasure, HalfSpaceGrid, WeightedField};

use crate::{goldens, ExactError, Result};

/// Unnormalized `h_{2m}`:
/// `sum_j 2^{2m} Re(y_j + i y_n)^{2m} + m! sum_l (-1)^l (2 y_n)^{2l} / ((m-l)! (2l)!)`.
///
/// Each tangential term is a harmonic polynomial homogeneous of degree `2m`,
/// and the normal polynomial is a multiple of `H_{2m}(y_n)`, so the whole
/// expression is annihilated by `1/4 Delta - y/2 . grad + m`.
pub fn h2m_unnormalized(m: usize, y: &[f64]) -> f64 {
    let n = y.len();
    let yn = y[n - 1];
    let scale = 4f64.powi(m as i32);
    let mut acc = 0.0;
    for &yj in &y[..n - 1] {
        acc += scale * re_pow(yj, yn, 2 * m);
    }
    let fact = |k: usize| -> f64 { (1..=k).map(|j| j as f64).product() };
    let mf = fact(m);
    for l in 0..=m {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        acc += mf * sign * (2.0 * yn).powi(2 * l as i32) / (fact(m - l) * fact(2 * l));
    }
    acc
}

/// `Re (a + ib)^k` by binomial expansion.
fn re_pow(a: f64, b: f64, k: usize) -> f64 {
    let mut acc = 0.0;
    let mut binom = 1.0;
    for j in 0..=k {
        if j % 2 == 0 {
            let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * a.powi((k - j) as i32) * b.powi(j as i32);
        }
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// `h_{2m} = C_{m,n}^{-1} * h2m_unnormalized`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2m {
    pub m: usize,
    pub n: usize,
    /// `C_{m,n}`.
    pub normalizer: f64,
}

impl H2m {
    /// Uses the stored reference value of `C_{m,n}`.
    pub fn reference(m: usize, n: usize) -> Result<Self> {
        let c = goldens::h2m_constant(n, m).ok_or_else(|| {
            ExactError::InvalidParameter(format!("no reference constant for m = {m}, n = {n}"))
        })?;
        Ok(Self { m, n, normalizer: c })
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        h2m_unnormalized(self.m, &y[..self.n]) / self.normalizer
    }
}

/// Sample `h_{2m}` on `grid`, normalized to unit discrete norm there.
/// Returns the field and the `C_{m,n}` that was used.
pub fn eval_h2m(m: usize, grid: &HalfSpaceGrid) -> Result<(WeightedField, f64)> {
    if m == 0 {
        return Err(ExactError::InvalidParameter("m must be at least 1".into()));
    }
    let raw = WeightedField::from_fn(grid, |y| h2m_unnormalized(m, y));
    let c = l2mu_norm(&raw, &GaussianMeasure::conformal(grid))?;
    if !(c > 0.0) {
        return Err(ExactError::DegenerateGrid("h_2m has zero norm".into()));
    }
    Ok((raw.scaled(1.0 / c), c))
}
