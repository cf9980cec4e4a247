use gaussian_calculus::WeightedField;

use crate::{ExactError, Result};

/// Parabolically `kappa`-homogeneous extension
/// `u(x, t) = (-t)^{kappa/2} w(x / (2 sqrt(-t)))` of a stationary
/// self-similar field `w`, interpolated multilinearly off the grid.
pub fn homogeneous_extend(stationary: &WeightedField, kappa: f64, x: &[f64], t: f64) -> Result<f64> {
    if !(t < 0.0) {
        return Err(ExactError::NonNegativeTime(t));
    }
    let n = stationary.grid().dim();
    if x.len() != n {
        return Err(ExactError::InvalidParameter(format!(
            "point has {} coordinates, grid dimension is {n}",
            x.len()
        )));
    }
    let s = (-t).sqrt();
    let y: Vec<f64> = x.iter().map(|v| v / (2.0 * s)).collect();
    let w = stationary
        .interpolate(&y)
        .ok_or_else(|| ExactError::OutsideGrid(x.to_vec()))?;
    Ok(s.powf(kappa) * w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaussian_calculus::make_grid;

    #[test]
    fn unit_time_recovers_half_scaled_field() {
        let g = make_grid(2, 4.0, 0.25).unwrap();
        let w = WeightedField::from_fn(&g, |y| y[0] + 2.0 * y[1]);
        let v = homogeneous_extend(&w, 1.5, &[1.0, 2.0], -1.0).unwrap();
        assert!((v - (0.5 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonnegative_time_and_far_points() {
        let g = make_grid(2, 1.0, 0.5).unwrap();
        let w = WeightedField::zeros(&g);
        assert!(matches!(
            homogeneous_extend(&w, 2.0, &[0.0, 0.0], 0.0),
            Err(ExactError::NonNegativeTime(_))
        ));
        assert!(matches!(
            homogeneous_extend(&w, 2.0, &[10.0, 0.0], -1.0),
            Err(ExactError::OutsideGrid(_))
        ));
    }
}
