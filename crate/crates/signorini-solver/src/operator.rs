use banded_linalg::{BandedCholesky, SymBanded};
use gaussian_calculus::{GaussianMeasure, HalfSpaceGrid};

use crate::{Result, SolverError};

const NONE: usize = usize::MAX;

/// Call `f(i, j, w)` for every grid edge `i < j`, with `w` the coefficient
/// `1/4 w_e / h^2` of the quadratic form `1/4 int |grad u|^2 dmu`.
pub(crate) fn for_each_edge(
    grid: &HalfSpaceGrid,
    m: &GaussianMeasure,
    mut f: impl FnMut(usize, usize, f64),
) {
    let h2 = grid.spacing() * grid.spacing();
    for axis in 0..grid.dim() {
        let s = grid.strides()[axis];
        let c = grid.counts()[axis];
        for i in 0..grid.len() {
            if grid.multi_index(i)[axis] + 1 == c {
                continue;
            }
            f(i, i + s, 0.25 * m.edge_weight(i, axis) / h2);
        }
    }
}

/// `K - kappa/2 M` applied to a full-grid vector; `K` is the matrix of the
/// quadratic form `1/4 int |grad u|^2 dmu`, `M` the diagonal mass. Rows of
/// truncation nodes are included for completeness.
pub fn apply_weiss_operator(
    grid: &HalfSpaceGrid,
    m: &GaussianMeasure,
    kappa: f64,
    u: &[f64],
) -> Vec<f64> {
    let mut out: Vec<f64> = u
        .iter()
        .zip(m.weights())
        .map(|(v, w)| -0.5 * kappa * w * v)
        .collect();
    for_each_edge(grid, m, |i, j, w| {
        let d = w * (u[i] - u[j]);
        out[i] += d;
        out[j] -= d;
    });
    out
}

/// The implicit Euler matrix `S = M/dtau + K - kappa/2 M` on the free nodes,
/// factored once, and its Schur complement on the contact plane.
///
/// Free nodes are all nodes off the truncation faces. They split into the
/// plane nodes `B` (the layer `y_n = 0`) and the interior `I`. Each plane
/// node couples to exactly one interior node, its upper neighbour, so the
/// Schur complement `T = S_BB - S_BI S_II^{-1} S_IB` needs one interior solve
/// per plane node.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: HalfSpaceGrid,
    measure: GaussianMeasure,
    kappa: f64,
    dtau: f64,
    interior: Vec<usize>,
    /// Boundary-layer indices `b` of the plane unknowns.
    plane: Vec<usize>,
    /// Interior position of each plane node's upper neighbour.
    above: Vec<usize>,
    /// `S[b, above(b)]`.
    coupling: Vec<f64>,
    chol: BandedCholesky,
    schur: Vec<f64>,
}

impl DiscreteOperator {
    pub fn new(grid: &HalfSpaceGrid, kappa: f64, dtau: f64) -> Result<Self> {
        if grid.counts()[grid.normal_axis()] < 3 || grid.counts()[0] < 3 {
            return Err(SolverError::InvalidConfig(
                "grid needs at least three nodes per axis".into(),
            ));
        }
        let measure = GaussianMeasure::conformal(grid);
        let sigma = 1.0 / dtau - 0.5 * kappa;
        let mass = measure.weights();

        let mut interior = Vec::new();
        let mut interior_pos = vec![NONE; grid.len()];
        let mut plane_pos = vec![NONE; grid.len()];
        let mut plane = Vec::new();
        for idx in 0..grid.len() {
            if grid.is_truncation(idx) {
                continue;
            }
            if grid.is_boundary_layer(idx) {
                plane_pos[idx] = plane.len();
                plane.push(idx / grid.counts()[grid.normal_axis()]);
            } else {
                interior_pos[idx] = interior.len();
                interior.push(idx);
            }
        }
        let nb = plane.len();
        let ni = interior.len();

        let mut bw = 0;
        let mut diag = vec![0.0; grid.len()];
        for_each_edge(grid, &measure, |i, j, w| {
            diag[i] += w;
            diag[j] += w;
            if interior_pos[i] != NONE && interior_pos[j] != NONE {
                bw = bw.max(interior_pos[j] - interior_pos[i]);
            }
        });
        let mut s_ii = SymBanded::zeros(ni, bw);
        for (p, &idx) in interior.iter().enumerate() {
            s_ii.add(p, p, diag[idx] + sigma * mass[idx])?;
        }
        let mut s_bb = vec![0.0; nb * nb];
        for (p, &b) in plane.iter().enumerate() {
            let idx = grid.boundary_node(b);
            s_bb[p * nb + p] = diag[idx] + sigma * mass[idx];
        }
        let mut above = vec![NONE; nb];
        let mut coupling = vec![0.0; nb];
        let mut failure = None;
        for_each_edge(grid, &measure, |i, j, w| {
            let (pi, pj) = (interior_pos[i], interior_pos[j]);
            let (bi, bj) = (plane_pos[i], plane_pos[j]);
            if pi != NONE && pj != NONE {
                if let Err(e) = s_ii.add(pi, pj, -w) {
                    failure = Some(e);
                }
            } else if bi != NONE && bj != NONE {
                s_bb[bi * nb + bj] -= w;
                s_bb[bj * nb + bi] -= w;
            } else if bi != NONE && pj != NONE {
                above[bi] = pj;
                coupling[bi] = -w;
            } else if bj != NONE && pi != NONE {
                above[bj] = pi;
                coupling[bj] = -w;
            }
        });
        if let Some(e) = failure {
            return Err(e.into());
        }
        let chol = s_ii.cholesky()?;

        let mut schur = s_bb;
        let mut col = vec![0.0; ni];
        for c in 0..nb {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[above[c]] = 1.0;
            chol.solve_in_place(&mut col)?;
            for b in 0..nb {
                schur[b * nb + c] -= coupling[b] * coupling[c] * col[above[b]];
            }
        }
        // Symmetrize away round-off.
        for b in 0..nb {
            for c in 0..b {
                let v = 0.5 * (schur[b * nb + c] + schur[c * nb + b]);
                schur[b * nb + c] = v;
                schur[c * nb + b] = v;
            }
        }
        Ok(Self {
            grid: grid.clone(),
            measure,
            kappa,
            dtau,
            interior,
            plane,
            above,
            coupling,
            chol,
            schur,
        })
    }

    pub fn grid(&self) -> &HalfSpaceGrid {
        &self.grid
    }

    pub fn measure(&self) -> &GaussianMeasure {
        &self.measure
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    /// Boundary-layer indices of the plane unknowns.
    pub fn plane(&self) -> &[usize] {
        &self.plane
    }

    pub fn plane_len(&self) -> usize {
        self.plane.len()
    }

    /// Row-major Schur complement on the plane unknowns.
    pub fn schur(&self) -> &[f64] {
        &self.schur
    }

    /// Eliminate the interior from `S u = r`: returns `S_II^{-1} r_I` and
    /// the reduced plane right-hand side `r_B - S_BI S_II^{-1} r_I`.
    pub(crate) fn reduce(&self, r: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut y: Vec<f64> = self.interior.iter().map(|&i| r[i]).collect();
        self.chol.solve_in_place(&mut y)?;
        let reduced = self
            .plane
            .iter()
            .enumerate()
            .map(|(p, &b)| r[self.grid.boundary_node(b)] - self.coupling[p] * y[self.above[p]])
            .collect();
        Ok((y, reduced))
    }

    /// Interior values given the eliminated solution `y = S_II^{-1} r_I`
    /// and plane values `u_b`: `y - S_II^{-1} S_IB u_B`.
    pub(crate) fn back_substitute(&self, y: &[f64], u_plane: &[f64]) -> Result<Vec<f64>> {
        let mut z = vec![0.0; self.interior.len()];
        for (p, u) in u_plane.iter().enumerate() {
            z[self.above[p]] += self.coupling[p] * u;
        }
        self.chol.solve_in_place(&mut z)?;
        Ok(y.iter().zip(&z).map(|(a, b)| a - b).collect())
    }

    /// Scatter interior and plane values into a full-grid vector with zero
    /// truncation data.
    pub(crate) fn assemble(&self, interior: &[f64], plane: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.grid.len()];
        for (&idx, v) in self.interior.iter().zip(interior) {
            u[idx] = *v;
        }
        for (&b, v) in self.plane.iter().zip(plane) {
            u[self.grid.boundary_node(b)] = *v;
        }
        u
    }

    /// `(T u)_b` for one plane row.
    pub(crate) fn schur_row_dot(&self, b: usize, u: &[f64]) -> f64 {
        let nb = self.plane.len();
        self.schur[b * nb..(b + 1) * nb]
            .iter()
            .zip(u)
            .map(|(t, v)| t * v)
            .sum()
    }
}
