use gaussian_calculus::{l2mu_norm, GaussianMeasure, HalfSpaceGrid, WeightedField};

use crate::{goldens, ExactError, Result};

/// `lambda * c_n * Re(y'.e + i|y_n|)^{3/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile32 {
    amplitude: f64,
    direction: Vec<f64>,
    c_n: f64,
}

const UNIT_TOL: f64 = 1e-9;

impl Profile32 {
    /// `direction` lists the `n - 1` tangential components of `e`.
    pub fn new(amplitude: f64, direction: &[f64], c_n: f64) -> Result<Self> {
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(ExactError::NonUnitDirection(norm));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(ExactError::InvalidParameter(format!(
                "amplitude must be nonnegative, got {amplitude}"
            )));
        }
        if !(c_n > 0.0 && c_n.is_finite()) {
            return Err(ExactError::InvalidParameter(format!(
                "normalization must be positive, got {c_n}"
            )));
        }
        Ok(Self {
            amplitude,
            direction: direction.to_vec(),
            c_n,
        })
    }

    /// Profile with the stored reference normalization for dimension
    /// `direction.len() + 1`.
    pub fn with_reference_constant(amplitude: f64, direction: &[f64]) -> Result<Self> {
        let n = direction.len() + 1;
        let c = goldens::profile_constant(n).ok_or_else(|| {
            ExactError::InvalidParameter(format!("no reference constant for n = {n}"))
        })?;
        Self::new(amplitude, direction, c)
    }

    /// Direction in the plane `y_n = 0` at angle `theta` from `e_1`
    /// (n = 3), or `e_1` / `-e_1` for `theta = 0` / `pi` (n = 2).
    pub fn direction_from_angle(n: usize, theta: f64) -> Vec<f64> {
        if n == 2 {
            vec![if theta.cos() >= 0.0 { 1.0 } else { -1.0 }]
        } else {
            vec![theta.cos(), theta.sin()]
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn normalization(&self) -> f64 {
        self.c_n
    }

    pub fn dim(&self) -> usize {
        self.direction.len() + 1
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        let n = self.dim();
        let a: f64 = self.direction.iter().zip(&y[..n - 1]).map(|(e, v)| e * v).sum();
        self.amplitude * self.c_n * profile_shape(a, y[n - 1])
    }
}

/// `Re(a + i|b|)^{3/2}` on the principal branch, written as
/// `r^{3/2} cos(3 theta / 2)` with `theta` in `[0, pi]`.
pub fn profile_shape(a: f64, b: f64) -> f64 {
    let b = b.abs();
    let r = a.hypot(b);
    if r == 0.0 {
        return 0.0;
    }
    let theta = b.atan2(a);
    if theta == std::f64::consts::PI {
        // cos(3 pi / 2) is not exactly zero in floating point.
        return 0.0;
    }
    r.powf(1.5) * (1.5 * theta).cos()
}

pub fn eval_profile32(p: &Profile32, grid: &HalfSpaceGrid) -> Result<WeightedField> {
    if p.dim() != grid.dim() {
        return Err(ExactError::InvalidParameter(format!(
            "profile dimension {} does not match grid dimension {}",
            p.dim(),
            grid.dim()
        )));
    }
    Ok(WeightedField::from_fn(grid, |y| p.value(y)))
}

/// The constant `c_n` that gives the sampled unit-amplitude profile unit
/// norm on `grid`.
pub fn normalize_profile(n: usize, grid: &HalfSpaceGrid) -> Result<f64> {
    if grid.dim() != n {
        return Err(ExactError::DegenerateGrid(format!(
            "grid has dimension {}, expected {n}",
            grid.dim()
        )));
    }
    if grid.cells() < 2 {
        return Err(ExactError::DegenerateGrid(
            "at least two cells per half-axis are needed".into(),
        ));
    }
    let m = GaussianMeasure::conformal(grid);
    let f = WeightedField::from_fn(grid, |y| profile_shape(y[0], y[n - 1]));
    let norm = l2mu_norm(&f, &m)?;
    if !(norm > 0.0) {
        return Err(ExactError::DegenerateGrid("profile has zero norm".into()));
    }
    Ok(1.0 / norm)
}

/// Nodes within one cell of the slit edge `{y'.e = 0, y_n = 0}`, where the
/// gradient of the profile blows up like `r^{-1/2}`. Quadratures of
/// pointwise gradients of the profile skip these nodes; the omitted region
/// has measure `O(h^2)` and the integrand is `O(h^{-1})` there, so the
/// induced error is `O(h)` in the integral of `|grad|^2` and `O(h^{3/2})`
/// in the integral of the gradient itself.
pub fn slit_collar_mask(grid: &HalfSpaceGrid, direction: &[f64]) -> Vec<bool> {
    let n = grid.dim();
    let h = grid.spacing();
    (0..grid.len())
        .map(|i| {
            let y = grid.coord(i);
            let a: f64 = direction.iter().zip(&y[..n - 1]).map(|(e, v)| e * v).sum();
            a.abs() <= h * (1.0 + 1e-9) && y[n - 1] <= h * (1.0 + 1e-9)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaussian_calculus::make_grid;

    #[test]
    fn shape_at_reference_points() {
        assert!((profile_shape(1.0, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(profile_shape(-1.0, 0.0), 0.0);
        let v = profile_shape(0.0, 1.0);
        assert!((v + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn profile_is_even_in_normal_coordinate() {
        for (a, b) in [(0.3, 0.7), (-1.2, 0.4), (2.0, 1.5)] {
            assert_eq!(profile_shape(a, b), profile_shape(a, -b));
        }
    }

    #[test]
    fn non_unit_direction_is_rejected() {
        assert!(matches!(
            Profile32::new(1.0, &[0.5, 0.5], 1.0),
            Err(ExactError::NonUnitDirection(_))
        ));
    }

    #[test]
    fn zero_amplitude_gives_zero_field() {
        let g = make_grid(2, 2.0, 0.25).unwrap();
        let p = Profile32::new(0.0, &[1.0], 1.3).unwrap();
        let f = eval_profile32(&p, &g).unwrap();
        assert!(f.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn normalized_profile_has_unit_norm() {
        let g = make_grid(2, 6.0, 0.05).unwrap();
        let c = normalize_profile(2, &g).unwrap();
        let p = Profile32::new(1.0, &[1.0], c).unwrap();
        let f = eval_profile32(&p, &g).unwrap();
        let m = GaussianMeasure::conformal(&g);
        assert!((l2mu_norm(&f, &m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collar_covers_the_edge_only() {
        let g = make_grid(2, 1.0, 0.25).unwrap();
        let mask = slit_collar_mask(&g, &[1.0]);
        let marked: Vec<[f64; 3]> = (0..g.len()).filter(|i| mask[*i]).map(|i| g.coord(i)).collect();
        assert_eq!(marked.len(), 6);
        assert!(marked.iter().all(|y| y[0].abs() <= 0.25 && y[1] <= 0.25));
    }
}
