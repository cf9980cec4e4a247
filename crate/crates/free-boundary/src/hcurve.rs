use conformal_transform::OriginalSolution;
use gaussian_calculus::{make_grid, GaussianMeasure, HalfSpaceGrid};
use serde::Serialize;

use crate::{FbError, Result};

/// A point `(x0, t0)` with `x0` on `{x_n = 0}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Center {
    pub x: Vec<f64>,
    pub t: f64,
}

impl Center {
    pub fn origin(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            t: 0.0,
        }
    }

    /// `|x - y| + |t - s|^{1/2}`.
    pub fn parabolic_distance(&self, other: &Center) -> f64 {
        let dx: f64 = self
            .x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        dx + (self.t - other.t).abs().sqrt()
    }
}

/// `u(x0 + x, t0 + t)`.
pub struct Translated<'a, U: ?Sized> {
    inner: &'a U,
    center: Center,
}

impl<'a, U: OriginalSolution + ?Sized> Translated<'a, U> {
    pub fn new(inner: &'a U, center: &Center) -> Result<Self> {
        if center.x.len() != inner.dim() || center.x[inner.dim() - 1] != 0.0 {
            return Err(FbError::InvalidArgument(format!(
                "center {:?} is not a boundary point in dimension {}",
                center.x,
                inner.dim()
            )));
        }
        Ok(Self {
            inner,
            center: center.clone(),
        })
    }
}

impl<U: OriginalSolution + ?Sized> OriginalSolution for Translated<'_, U> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &[f64], t: f64) -> Option<f64> {
        let shifted: Vec<f64> = x.iter().zip(&self.center.x).map(|(a, b)| a + b).collect();
        self.inner.eval(&shifted, t + self.center.t)
    }
}

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Quadrature for `H_u(r) = r^{-2} int_{-r^2}^0 int_{x_n > 0} u^2 G dx dt`.
///
/// With `t = -r^2 xi^2` and `x = 2 sqrt(-t) y` the kernel becomes
/// `pi^{-n/2} e^{-|y|^2} dy`, integrated by the trapezoid rule on `grid`,
/// and `H_u(r) = int_0^1 2 xi I(r^2 xi^2) d xi` with `I(s)` the spatial
/// integral at `t = -s`, integrated by 8-point Gauss-Legendre in `xi`. For
/// `kappa`-homogeneous data the time integrand is `xi^{2 kappa + 1}`, a
/// polynomial for `2 kappa` integer and exactly integrated up to degree 15.
#[derive(Debug, Clone)]
pub struct HQuadrature {
    grid: HalfSpaceGrid,
    weights: Vec<f64>,
}

impl HQuadrature {
    pub fn new(n: usize, radius: f64, h: f64) -> Result<Self> {
        let grid = make_grid(n, radius, h)?;
        let m = GaussianMeasure::conformal(&grid);
        let scale = std::f64::consts::PI.powf(-0.5 * n as f64);
        let weights = m.weights().iter().map(|w| w * scale).collect();
        Ok(Self { grid, weights })
    }

    pub fn grid(&self) -> &HalfSpaceGrid {
        &self.grid
    }

    fn spatial<U: OriginalSolution + ?Sized>(&self, u: &U, s: f64) -> Result<f64> {
        let n = self.grid.dim();
        let scale = 2.0 * s.sqrt();
        let t = -s;
        let mut x = vec![0.0; n];
        let mut total = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let y = self.grid.coord(i);
            for a in 0..n {
                x[a] = scale * y[a];
            }
            let v = u.eval(&x, t).ok_or_else(|| FbError::OutsideData {
                x: x.clone(),
                t,
            })?;
            total += w * v * v;
        }
        Ok(total)
    }

    /// `H_u(r)` of data already centered at the origin.
    pub fn h_value<U: OriginalSolution + ?Sized>(&self, u: &U, r: f64) -> Result<f64> {
        let mut total = 0.0;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            for xi in [0.5 * (1.0 - x), 0.5 * (1.0 + x)] {
                total += 0.5 * w * 2.0 * xi * self.spatial(u, r * r * xi * xi)?;
            }
        }
        Ok(total)
    }
}

/// Radii `r_max 10^{-k/8}` down to `r_min`, largest first.
pub fn dyadic_radii(r_min: f64, r_max: f64) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_max > r_min) {
        return Err(FbError::InvalidArgument(format!(
            "radius range [{r_min}, {r_max}]"
        )));
    }
    let decades = (r_max / r_min).log10();
    let steps = (8.0 * decades + 1e-9).floor() as usize;
    Ok((0..=steps)
        .map(|k| r_max * 10f64.powf(-(k as f64) / 8.0))
        .collect())
}

/// `r -> H_u(r)` with the least-squares slope of `ln H` against `ln r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HCurve {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Slope over the middle two decades of the radius range, or the whole
    /// range when it spans two decades or less.
    pub slope: f64,
    pub fit_window: [f64; 2],
    /// `slope / 2`: `H_u(r) ~ r^{2 kappa}` for `kappa`-homogeneous data.
    pub kappa_fit: f64,
}

impl HCurve {
    pub fn from_values(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(FbError::InvalidArgument("need two or more radii".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(FbError::InvalidArgument(format!(
                "H-curve must be positive, found {v}"
            )));
        }
        let lo = radii.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = radii.iter().cloned().fold(0.0, f64::max);
        let span = (hi / lo).log10();
        let trim = 10f64.powf(((span - 2.0) / 2.0).max(0.0));
        let window = [lo * trim, hi / trim];
        let tol = 1e-9;
        let pts: Vec<(f64, f64)> = radii
            .iter()
            .zip(&values)
            .filter(|(r, _)| **r >= window[0] * (1.0 - tol) && **r <= window[1] * (1.0 + tol))
            .map(|(r, v)| (r.ln(), v.ln()))
            .collect();
        if pts.len() < 2 {
            return Err(FbError::InvalidArgument("fit window holds fewer than two radii".into()));
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let slope = sxy / sxx;
        Ok(Self {
            radii,
            values,
            slope,
            fit_window: window,
            kappa_fit: 0.5 * slope,
        })
    }
}

/// `H_u` around `center` on the given radii. The data are translated so
/// that the kernel stays centered at the origin.
pub fn compute_h<U: OriginalSolution + ?Sized>(
    u: &U,
    center: &Center,
    radii: &[f64],
    quad: &HQuadrature,
) -> Result<HCurve> {
    if quad.grid().dim() != u.dim() {
        return Err(FbError::InvalidArgument("quadrature dimension differs from the data".into()));
    }
    let shifted = Translated::new(u, center)?;
    let values = radii
        .iter()
        .map(|&r| {
            quad.h_value(&shifted, r).map_err(|e| match e {
                FbError::OutsideData { .. } => FbError::RadiusOutOfRange { r },
                e => e,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    HCurve::from_values(radii.to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let mut s = 0.0;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            for xi in [0.5 * (1.0 - x), 0.5 * (1.0 + x)] {
                s += 0.5 * w * xi.powi(15);
            }
        }
        assert!((s - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn radii_have_eight_per_decade() {
        let r = dyadic_radii(1e-2, 1.0).unwrap();
        assert_eq!(r.len(), 17);
        assert!((r[8] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn slope_window_is_central() {
        let r = dyadic_radii(1e-4, 1.0).unwrap();
        let v: Vec<f64> = r.iter().map(|r| r.powi(3)).collect();
        let c = HCurve::from_values(r, v).unwrap();
        assert!((c.slope - 3.0).abs() < 1e-12);
        assert!((c.fit_window[0] - 1e-3).abs() < 1e-15);
        assert!((c.fit_window[1] - 1e-1).abs() < 1e-15);
    }
}
