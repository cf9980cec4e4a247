use crate::fd::dirichlet_form;
use crate::grid::{HalfSpaceGrid, MAX_DIM};
use crate::measure::GaussianMeasure;
use crate::{CalcError, Result};

/// Scalar field sampled on every node of a [`HalfSpaceGrid`], tagged with a
/// time stamp (`tau` in self-similar coordinates, `t` in original ones).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedField {
    grid: HalfSpaceGrid,
    values: Vec<f64>,
    time: f64,
}

impl WeightedField {
    /// Wrap node values; rejects wrong lengths and non-finite entries.
    pub fn new(grid: HalfSpaceGrid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CalcError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CalcError::NonFinite(i));
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: &HalfSpaceGrid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid: grid.clone(),
            time: 0.0,
        }
    }

    /// Sample `f(y)` at every node. `f` receives the first `n` coordinates.
    pub fn from_fn(grid: &HalfSpaceGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let n = grid.dim();
        let values = (0..grid.len())
            .map(|i| {
                let y = grid.coord(i);
                f(&y[..n])
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &HalfSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    /// Values on the layer `y_n = 0`, indexed by boundary node.
    pub fn boundary_trace(&self) -> Vec<f64> {
        (0..self.grid.boundary_len())
            .map(|b| self.values[self.grid.boundary_node(b)])
            .collect()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(CalcError::GridMismatch)
        }
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            values,
            time: self.time,
        })
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| alpha * v).collect(),
            time: self.time,
        }
    }

    /// Maximum absolute nodal difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Multilinear interpolation at an arbitrary point of the closed box.
    /// Returns `None` outside the grid (beyond a relative slack of 1e-12).
    pub fn interpolate(&self, point: &[f64]) -> Option<f64> {
        let g = &self.grid;
        let n = g.dim();
        let h = g.spacing();
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0f64; MAX_DIM];
        for a in 0..n {
            let origin = g.axis_coord(a, 0);
            let s = (point[a] - origin) / h;
            let last = (g.counts()[a] - 1) as f64;
            let slack = 1e-9;
            if !(s >= -slack && s <= last + slack) {
                return None;
            }
            let s = s.clamp(0.0, last);
            let i = (s.floor() as usize).min(g.counts()[a] - 2);
            base[a] = i;
            frac[a] = s - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = 0;
            for a in 0..n {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                idx += (base[a] + bit) * g.strides()[a];
            }
            if w != 0.0 {
                acc += w * self.values[idx];
            }
        }
        Some(acc)
    }
}

/// Weighted inner product `sum_i w_i a_i b_i`.
pub fn inner_mu(a: &WeightedField, b: &WeightedField, m: &GaussianMeasure) -> Result<f64> {
    a.check_same(b)?;
    if m.weights().len() != a.values.len() {
        return Err(CalcError::GridMismatch);
    }
    Ok(m
        .weights()
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .map(|(w, (x, y))| w * x * y)
        .sum())
}

/// `L^2` norm against the measure.
pub fn l2mu_norm(a: &WeightedField, m: &GaussianMeasure) -> Result<f64> {
    Ok(inner_mu(a, a, m)?.sqrt())
}

/// `W^{1,2}` norm: `(|a|^2 + |grad a|^2)^{1/2}` against the measure, with the
/// gradient term from the edge-difference Dirichlet form.
pub fn w12mu_norm(a: &WeightedField, m: &GaussianMeasure) -> Result<f64> {
    let l2 = inner_mu(a, a, m)?;
    let grad = dirichlet_form(a, a, m)?;
    Ok((l2 + grad).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::make_grid;

    #[test]
    fn constant_mass_and_odd_moment() {
        let g = make_grid(2, 6.0, 0.05).unwrap();
        let m = GaussianMeasure::conformal(&g);
        let one = WeightedField::from_fn(&g, |_| 1.0);
        let y1 = WeightedField::from_fn(&g, |y| y[0]);
        let mass = inner_mu(&one, &one, &m).unwrap();
        assert!((mass - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
        assert!(inner_mu(&one, &y1, &m).unwrap().abs() < 1e-12);
    }

    #[test]
    fn norm_of_normal_coordinate() {
        let g = make_grid(2, 6.0, 0.05).unwrap();
        let m = GaussianMeasure::conformal(&g);
        let yn = WeightedField::from_fn(&g, |y| y[1]);
        let expected = (std::f64::consts::FRAC_PI_2 * 0.5).sqrt();
        assert!((l2mu_norm(&yn, &m).unwrap() - expected).abs() < 1e-3);
        let zero = WeightedField::zeros(&g);
        assert_eq!(l2mu_norm(&zero, &m).unwrap(), 0.0);
        assert_eq!(w12mu_norm(&zero, &m).unwrap(), 0.0);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let g1 = make_grid(2, 2.0, 0.5).unwrap();
        let g2 = make_grid(2, 2.0, 0.25).unwrap();
        let m = GaussianMeasure::conformal(&g1);
        let a = WeightedField::zeros(&g1);
        let b = WeightedField::zeros(&g2);
        assert!(matches!(inner_mu(&a, &b, &m), Err(CalcError::GridMismatch)));
    }

    #[test]
    fn interpolation_is_exact_on_multilinear_functions() {
        let g = make_grid(3, 2.0, 0.5).unwrap();
        let f = |y: &[f64]| 1.0 + 2.0 * y[0] - y[1] + 0.5 * y[2] + y[0] * y[1] * y[2];
        let field = WeightedField::from_fn(&g, f);
        for p in [[0.1, -0.3, 0.7], [1.99, -2.0, 0.0], [-0.25, 0.25, 1.9]] {
            let v = field.interpolate(&p).unwrap();
            assert!((v - f(&p)).abs() < 1e-12);
        }
        assert!(field.interpolate(&[2.1, 0.0, 0.0]).is_none());
        assert!(field.interpolate(&[0.0, 0.0, -0.1]).is_none());
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = make_grid(2, 1.0, 0.5).unwrap();
        let mut v = vec![0.0; g.len()];
        v[3] = f64::NAN;
        assert!(matches!(
            WeightedField::new(g, v, 0.0),
            Err(CalcError::NonFinite(3))
        ));
    }
}
