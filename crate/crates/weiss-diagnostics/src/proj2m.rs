use exact_solutions::{eval_h2m, eval_hermite, hermite_basis, MultiIndex};
use gaussian_calculus::{inner_mu, GaussianMeasure, HalfSpaceGrid, WeightedField};

use crate::{DiagError, Result};

/// The sampled basis `p_alpha`, `|alpha| = 2m`, `alpha_n` even, of `E_{2m}`
/// together with the sampled `h_{2m}`.
#[derive(Debug, Clone)]
pub struct E2mBasis {
    m: usize,
    indices: Vec<MultiIndex>,
    fields: Vec<WeightedField>,
    h2m: WeightedField,
}

impl E2mBasis {
    pub fn new(grid: &HalfSpaceGrid, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(DiagError::InvalidArgument("m must be at least 1".into()));
        }
        let indices = hermite_basis(grid.dim(), 2 * m..=2 * m);
        let fields = indices
            .iter()
            .map(|a| eval_hermite(a, grid))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let (h2m, _) = eval_h2m(m, grid)?;
        Ok(Self {
            m,
            indices,
            fields,
            h2m,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn fields(&self) -> &[WeightedField] {
        &self.fields
    }

    /// `h_{2m}`, normalized to unit discrete norm.
    pub fn h2m(&self) -> &WeightedField {
        &self.h2m
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition2m {
    pub coeffs: Vec<f64>,
    pub remainder: WeightedField,
    /// `max_alpha |<v, p_alpha>|`.
    pub orth2: f64,
}

/// `lambda_alpha = <u, p_alpha>` and `v = u - sum lambda_alpha p_alpha`.
pub fn project_e2m(
    u: &WeightedField,
    basis: &E2mBasis,
    m: &GaussianMeasure,
) -> Result<Decomposition2m> {
    let coeffs = basis
        .fields
        .iter()
        .map(|p| inner_mu(u, p, m))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut remainder = u.clone();
    for (c, p) in coeffs.iter().zip(&basis.fields) {
        remainder = remainder.add_scaled(-c, p)?;
    }
    let mut orth2 = 0.0f64;
    for p in &basis.fields {
        orth2 = orth2.max(inner_mu(&remainder, p, m)?.abs());
    }
    Ok(Decomposition2m {
        coeffs,
        remainder,
        orth2,
    })
}

/// `lambda_{2m} = <u, h_{2m}>`.
pub fn lambda_2m(u: &WeightedField, basis: &E2mBasis, m: &GaussianMeasure) -> Result<f64> {
    Ok(inner_mu(u, &basis.h2m, m)?)
}
