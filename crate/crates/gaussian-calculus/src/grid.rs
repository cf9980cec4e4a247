use crate::{CalcError, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Uniform tensor grid on `[-R, R]^{n-1} x [0, R]`.
///
/// Nodes are stored in row-major order with the normal axis `y_n` last, so
/// the normal index runs fastest. Tangential coordinates are `(i - R/h) h`
/// and normal coordinates are `i h`; the plane `y_n = 0` is always a full
/// layer of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceGrid {
    n: usize,
    radius: f64,
    h: f64,
    cells: usize,
    counts: [usize; MAX_DIM],
    strides: [usize; MAX_DIM],
    len: usize,
}

/// Build the grid for dimension `n`, truncation radius `radius` and spacing `h`.
pub fn make_grid(n: usize, radius: f64, h: f64) -> Result<HalfSpaceGrid> {
    HalfSpaceGrid::new(n, radius, h)
}

impl HalfSpaceGrid {
    pub fn new(n: usize, radius: f64, h: f64) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(CalcError::UnsupportedDim(n));
        }
        if !(radius.is_finite() && radius > 0.0 && h.is_finite() && h > 0.0) {
            return Err(CalcError::InvalidParameter(format!(
                "radius {radius} and spacing {h} must be positive"
            )));
        }
        let ratio = radius / h;
        let cells = ratio.round();
        if (ratio - cells).abs() > 1e-9 * ratio.max(1.0) || cells < 1.0 {
            return Err(CalcError::NonIntegralRatio { radius, spacing: h });
        }
        let cells = cells as usize;
        let mut counts = [1usize; MAX_DIM];
        for c in counts.iter_mut().take(n - 1) {
            *c = 2 * cells + 1;
        }
        counts[n - 1] = cells + 1;
        let mut strides = [0usize; MAX_DIM];
        let mut s = 1;
        for a in (0..n).rev() {
            strides[a] = s;
            s *= counts[a];
        }
        Ok(Self {
            n,
            radius,
            h,
            cells,
            counts,
            strides,
            len: s,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Number of cells between the origin and the truncation boundary, `R/h`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Node counts per axis (only the first `dim()` entries are meaningful).
    pub fn counts(&self) -> &[usize] {
        &self.counts[..self.n]
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides[..self.n]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Axis index of the normal direction.
    pub fn normal_axis(&self) -> usize {
        self.n - 1
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(self.strides())
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0usize; MAX_DIM];
        for a in 0..self.n {
            out[a] = idx / self.strides[a];
            idx %= self.strides[a];
        }
        out
    }

    /// Coordinate of node index `i` along `axis`.
    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        if axis == self.n - 1 {
            i as f64 * self.h
        } else {
            (i as f64 - self.cells as f64) * self.h
        }
    }

    /// Cartesian coordinates of node `idx` (unused trailing entries are 0).
    pub fn coord(&self, idx: usize) -> [f64; MAX_DIM] {
        let m = self.multi_index(idx);
        let mut y = [0.0; MAX_DIM];
        for a in 0..self.n {
            y[a] = self.axis_coord(a, m[a]);
        }
        y
    }

    /// True on the artificial truncation boundary where Dirichlet data is imposed.
    pub fn is_truncation(&self, idx: usize) -> bool {
        let m = self.multi_index(idx);
        (0..self.n - 1).any(|a| m[a] == 0 || m[a] == self.counts[a] - 1)
            || m[self.n - 1] == self.counts[self.n - 1] - 1
    }

    /// True on the plane `y_n = 0`, truncation edges included.
    pub fn is_boundary_layer(&self, idx: usize) -> bool {
        idx % self.counts[self.n - 1] == 0
    }

    /// Number of nodes in the layer `y_n = 0`.
    pub fn boundary_len(&self) -> usize {
        self.len / self.counts[self.n - 1]
    }

    /// Grid index of the `b`-th node of the boundary layer.
    pub fn boundary_node(&self, b: usize) -> usize {
        b * self.counts[self.n - 1]
    }

    /// Tangential coordinates `y'` of boundary node `b`.
    pub fn boundary_coord(&self, b: usize) -> [f64; MAX_DIM] {
        self.coord(self.boundary_node(b))
    }

    /// Boundary-layer nodes that are not on the truncation edge.
    pub fn contact_nodes(&self) -> Vec<usize> {
        (0..self.boundary_len())
            .filter(|&b| !self.is_truncation(self.boundary_node(b)))
            .collect()
    }

    /// True when both grids describe the same node set.
    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n
            && self.counts == other.counts
            && (self.h - other.h).abs() <= 1e-12 * self.h
    }

    /// Ensure every axis carries at least `needed` nodes.
    pub fn require_nodes(&self, needed: usize) -> Result<()> {
        for (axis, &count) in self.counts().iter().enumerate() {
            if count < needed {
                return Err(CalcError::GridTooSmall {
                    axis,
                    count,
                    needed,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_counts_match_arithmetic() {
        let g = make_grid(2, 6.0, 0.05).unwrap();
        assert_eq!(g.counts(), &[241, 121]);
        let g = make_grid(3, 5.0, 0.125).unwrap();
        assert_eq!(g.counts(), &[81, 81, 41]);
        assert_eq!(g.len(), 81 * 81 * 41);
    }

    #[test]
    fn non_integral_ratio_is_rejected() {
        assert!(matches!(
            make_grid(2, 6.0, 0.07),
            Err(CalcError::NonIntegralRatio { .. })
        ));
        assert!(matches!(
            make_grid(4, 6.0, 0.5),
            Err(CalcError::UnsupportedDim(4))
        ));
    }

    #[test]
    fn index_round_trip_and_coordinates() {
        let g = make_grid(3, 2.0, 0.5).unwrap();
        for idx in 0..g.len() {
            let m = g.multi_index(idx);
            assert_eq!(g.index(&m[..3]), idx);
        }
        let origin = g.index(&[4, 4, 0]);
        assert_eq!(g.coord(origin), [0.0, 0.0, 0.0]);
        assert!(g.is_boundary_layer(origin));
        assert!(!g.is_truncation(origin));
        assert!(g.is_truncation(g.index(&[0, 4, 1])));
        assert!(g.is_truncation(g.index(&[3, 4, 4])));
        assert_eq!(g.boundary_len(), 81);
        assert_eq!(g.contact_nodes().len(), 49);
    }
}
