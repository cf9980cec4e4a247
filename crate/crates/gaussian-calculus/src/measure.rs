use statrs::function::erf::erf;

use crate::grid::{HalfSpaceGrid, MAX_DIM};

/// Which Gaussian density the quadrature integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    /// `dmu = e^{-|y|^2} dy` in self-similar coordinates.
    Conformal,
    /// `dmu~ = e^{-|x|^2/4} dx` in original coordinates.
    Original,
}

impl MeasureKind {
    /// Density value at a point.
    pub fn density(self, y: &[f64]) -> f64 {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        match self {
            MeasureKind::Conformal => (-r2).exp(),
            MeasureKind::Original => (-0.25 * r2).exp(),
        }
    }
}

/// Trapezoid quadrature weights against a Gaussian density.
///
/// `weights[i]` integrates over the full truncated box; `boundary_weights[b]`
/// integrates over the layer `y_n = 0` with the `(n-1)`-dimensional measure.
#[derive(Debug, Clone)]
pub struct GaussianMeasure {
    kind: MeasureKind,
    weights: Vec<f64>,
    boundary_weights: Vec<f64>,
    edge_weights: Vec<[f64; MAX_DIM]>,
}

fn trapezoid_factor(grid: &HalfSpaceGrid, multi: &[usize], skip: Option<usize>) -> f64 {
    let mut f = 1.0;
    for (a, (&i, &c)) in multi.iter().zip(grid.counts()).enumerate() {
        if Some(a) == skip {
            continue;
        }
        if i == 0 || i + 1 == c {
            f *= 0.5;
        }
    }
    f
}

impl GaussianMeasure {
    pub fn new(grid: &HalfSpaceGrid, kind: MeasureKind) -> Self {
        let n = grid.dim();
        let h = grid.spacing();
        let cell = h.powi(n as i32);
        let weights = (0..grid.len())
            .map(|idx| {
                let m = grid.multi_index(idx);
                let y = grid.coord(idx);
                cell * trapezoid_factor(grid, &m[..n], None) * kind.density(&y[..n])
            })
            .collect();
        let face = h.powi(n as i32 - 1);
        let boundary_weights = (0..grid.boundary_len())
            .map(|b| {
                let idx = grid.boundary_node(b);
                let m = grid.multi_index(idx);
                let y = grid.coord(idx);
                face * trapezoid_factor(grid, &m[..n], Some(n - 1)) * kind.density(&y[..n])
            })
            .collect();
        let edge_weights = (0..grid.len())
            .map(|idx| {
                let m = grid.multi_index(idx);
                let mut w = [0.0; MAX_DIM];
                for (axis, slot) in w.iter_mut().enumerate().take(n) {
                    if m[axis] + 1 == grid.counts()[axis] {
                        continue;
                    }
                    let mut y = grid.coord(idx);
                    y[axis] += 0.5 * h;
                    *slot = cell
                        * trapezoid_factor(grid, &m[..n], Some(axis))
                        * kind.density(&y[..n]);
                }
                w
            })
            .collect();
        Self {
            kind,
            weights,
            boundary_weights,
            edge_weights,
        }
    }

    pub fn conformal(grid: &HalfSpaceGrid) -> Self {
        Self::new(grid, MeasureKind::Conformal)
    }

    pub fn original(grid: &HalfSpaceGrid) -> Self {
        Self::new(grid, MeasureKind::Original)
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn boundary_weights(&self) -> &[f64] {
        &self.boundary_weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Exact Gaussian mass of the truncated box, via the error function.
    pub fn closed_form_mass(grid: &HalfSpaceGrid, kind: MeasureKind) -> f64 {
        let r = grid.radius();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let (line, half) = match kind {
            MeasureKind::Conformal => (sqrt_pi * erf(r), 0.5 * sqrt_pi * erf(r)),
            MeasureKind::Original => (2.0 * sqrt_pi * erf(0.5 * r), sqrt_pi * erf(0.5 * r)),
        };
        line.powi(grid.dim() as i32 - 1) * half
    }

    /// Weight of the edge joining `idx` and `idx + stride(axis)` in the
    /// discrete Dirichlet form. The density is taken at the edge midpoint and
    /// the transverse directions use trapezoid factors, so edges lying in a
    /// face of the box carry half weight. Nodes on the last layer of an axis
    /// have no edge in that direction and report 0.
    pub fn edge_weight(&self, idx: usize, axis: usize) -> f64 {
        self.edge_weights[idx][axis]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::make_grid;

    #[test]
    fn conformal_mass_matches_half_plane_gaussian() {
        let g = make_grid(2, 6.0, 0.05).unwrap();
        let m = GaussianMeasure::conformal(&g);
        let pi_half = std::f64::consts::FRAC_PI_2;
        assert!((m.total_mass() - pi_half).abs() < 1e-3);
        let exact = GaussianMeasure::closed_form_mass(&g, MeasureKind::Conformal);
        assert!((m.total_mass() / exact - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mass_error_is_second_order_in_h() {
        // R = 2 keeps the truncated box mass away from the plateau where the
        // trapezoid rule for Gaussians becomes spectrally accurate.
        let exact = |g: &HalfSpaceGrid| GaussianMeasure::closed_form_mass(g, MeasureKind::Conformal);
        let mut errs = Vec::new();
        for h in [0.4, 0.2, 0.1] {
            let g = make_grid(2, 2.0, h).unwrap();
            let m = GaussianMeasure::conformal(&g);
            errs.push((m.total_mass() - exact(&g)).abs());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
        }
    }

    #[test]
    fn original_mass_matches_closed_form() {
        let g = make_grid(3, 10.0, 0.25).unwrap();
        let m = GaussianMeasure::original(&g);
        let exact = GaussianMeasure::closed_form_mass(&g, MeasureKind::Original);
        assert!((m.total_mass() / exact - 1.0).abs() < 1e-3);
    }

    #[test]
    fn boundary_weights_integrate_the_trace_plane() {
        let g = make_grid(3, 5.0, 0.125).unwrap();
        let m = GaussianMeasure::conformal(&g);
        let total: f64 = m.boundary_weights().iter().sum();
        assert!((total - std::f64::consts::PI).abs() < 1e-3);
    }
}
