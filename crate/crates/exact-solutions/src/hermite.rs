use gaussian_calculus::{HalfSpaceGrid, WeightedField};

use crate::{ExactError, Result};

pub type MultiIndex = Vec<usize>;

/// Physicist Hermite polynomial `H_k(x)`, solving `U'' - 2x U' = -2k U`,
/// by the three-term recurrence `H_{k+1} = 2x H_k - 2k H_{k-1}`.
pub fn hermite_poly(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `c_alpha` with `|c_alpha prod H_{alpha_i}(y_i)|` of unit norm on the
/// half-space against `e^{-|y|^2}`. Uses `int_R H_k^2 e^{-x^2} = 2^k k! sqrt(pi)`
/// and the factor 2 from restricting an even function to `y_n >= 0`.
pub fn hermite_normalizer(alpha: &[usize]) -> f64 {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let full: f64 = alpha
        .iter()
        .map(|&k| {
            let fact: f64 = (1..=k).map(|j| j as f64).product();
            2f64.powi(k as i32) * fact * sqrt_pi
        })
        .product();
    (2.0 / full).sqrt()
}

fn check_index(alpha: &[usize], n: usize) -> Result<()> {
    if alpha.len() != n || alpha[n - 1] % 2 != 0 {
        return Err(ExactError::BadMultiIndex(alpha.to_vec()));
    }
    Ok(())
}

/// All admissible multi-indices (`alpha_n` even) of total degree in
/// `degrees`, in graded lexicographic order.
pub fn hermite_basis(n: usize, degrees: std::ops::RangeInclusive<usize>) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for d in degrees {
        let mut level = Vec::new();
        enumerate(n, d, &mut Vec::new(), &mut level);
        level.retain(|a: &MultiIndex| a[n - 1] % 2 == 0);
        level.sort_by(|a, b| b.cmp(a));
        out.extend(level);
    }
    out
}

fn enumerate(n: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == n {
        let mut a = prefix.clone();
        a.push(remaining);
        out.push(a);
        return;
    }
    for k in 0..=remaining {
        prefix.push(k);
        enumerate(n, remaining - k, prefix, out);
        prefix.pop();
    }
}

/// `sum_alpha lambda_alpha p_alpha` with `p_alpha = c_alpha prod H_{alpha_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteElement {
    n: usize,
    terms: Vec<(MultiIndex, f64)>,
}

impl HermiteElement {
    pub fn new(n: usize, terms: Vec<(MultiIndex, f64)>) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(ExactError::InvalidParameter(format!("unsupported dimension {n}")));
        }
        for (a, c) in &terms {
            check_index(a, n)?;
            if !c.is_finite() {
                return Err(ExactError::InvalidParameter("non-finite coefficient".into()));
            }
        }
        Ok(Self { n, terms })
    }

    pub fn single(alpha: &[usize]) -> Result<Self> {
        Self::new(alpha.len(), vec![(alpha.to_vec(), 1.0)])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }

    /// Largest total degree carrying a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(a, _)| a.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Sum of squared coefficients, the exact squared norm.
    pub fn coefficient_norm_sq(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c * c).sum()
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| {
                c * hermite_normalizer(a)
                    * a.iter().zip(y).map(|(&k, &x)| hermite_poly(k, x)).product::<f64>()
            })
            .sum()
    }

    /// Minimum of the trace on the boundary nodes of `grid`; the element is
    /// taken to lie in the nonnegative-trace cone when this is `>= -tol`.
    pub fn trace_min(&self, grid: &HalfSpaceGrid) -> f64 {
        (0..grid.boundary_len())
            .map(|b| {
                let y = grid.coord(grid.boundary_node(b));
                self.value(&y[..self.n])
            })
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn eval_hermite(alpha: &[usize], grid: &HalfSpaceGrid) -> Result<WeightedField> {
    check_index(alpha, grid.dim())?;
    let c = hermite_normalizer(alpha);
    Ok(WeightedField::from_fn(grid, |y| {
        c * alpha.iter().zip(y).map(|(&k, &x)| hermite_poly(k, x)).product::<f64>()
    }))
}

pub fn assemble_element(e: &HermiteElement, grid: &HalfSpaceGrid) -> Result<WeightedField> {
    if e.dim() != grid.dim() {
        return Err(ExactError::InvalidParameter(format!(
            "element dimension {} does not match grid dimension {}",
            e.dim(),
            grid.dim()
        )));
    }
    Ok(WeightedField::from_fn(grid, |y| e.value(y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_polynomials() {
        let x = 0.7;
        assert_eq!(hermite_poly(0, x), 1.0);
        assert!((hermite_poly(1, x) - 2.0 * x).abs() < 1e-15);
        assert!((hermite_poly(2, x) - (4.0 * x * x - 2.0)).abs() < 1e-14);
        assert!((hermite_poly(3, x) - (8.0 * x.powi(3) - 12.0 * x)).abs() < 1e-13);
        assert!((hermite_poly(4, x) - (16.0 * x.powi(4) - 48.0 * x * x + 12.0)).abs() < 1e-12);
    }

    #[test]
    fn basis_enumeration_respects_parity() {
        let b = hermite_basis(2, 0..=2);
        assert_eq!(b, vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![0, 2]]);
        let b3 = hermite_basis(3, 2..=2);
        assert!(b3.iter().all(|a| a[2] % 2 == 0 && a.iter().sum::<usize>() == 2));
        assert_eq!(b3.len(), 4);
    }

    #[test]
    fn odd_normal_index_is_rejected() {
        assert!(HermiteElement::single(&[0, 1]).is_err());
    }

    #[test]
    fn degree_ignores_zero_coefficients() {
        let e = HermiteElement::new(2, vec![(vec![3, 0], 0.0), (vec![0, 2], 1.0)]).unwrap();
        assert_eq!(e.degree(), 2);
    }
}
