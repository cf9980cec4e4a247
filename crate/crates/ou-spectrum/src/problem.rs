use banded_linalg::{lowest_eigenpairs, EigenOptions, SymBanded};
use gaussian_calculus::{make_grid, WeightedField};
use serde::Serialize;

use crate::{Result, SpectrumError};

/// How the evenness in `z_2` is imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// Unknowns on `z_2 >= 0` with the natural Neumann condition at
    /// `z_2 = 0`, where quadrature weights are halved.
    Reduced,
    /// Unknowns on the whole half-plane; odd modes are present and removed
    /// after the solve.
    Full,
}

/// The discrete pencil on `[0, R_z] x [0, R_z]` (or `[-R_z, R_z]` in
/// `z_2`) with `cells` intervals per unit `R_z`. Unknowns are the nodes
/// with `0 < z_1 < R_z`, `|z_2| < R_z`, ordered with `z_2` fastest.
#[derive(Debug, Clone)]
pub struct SlitEigenProblem {
    rz: f64,
    cells: usize,
    symmetry: Symmetry,
    nodes: Vec<(usize, isize)>,
    stiffness: SymBanded,
    mass: Vec<f64>,
}

fn weight(z1: f64, z2: f64) -> f64 {
    let r2 = z1 * z1 + z2 * z2;
    (-r2 * r2).exp()
}

/// Assemble the pencil with `cells` intervals on `[0, R_z]`.
///
/// The stiffness sums `e^{-|z_mid|^4} (u_p - u_q)^2` over grid edges, with
/// the weight taken at the edge midpoint; the mass is
/// `8|z|^2 e^{-|z|^4} h^2` at every node. Under `Reduced` symmetry, edges
/// and nodes on `z_2 = 0` carry half weight. The slit tip `z = 0` lies on
/// the Dirichlet line, so the degenerate factor `|z|^2` never enters a
/// row.
pub fn assemble(rz: f64, cells: usize, symmetry: Symmetry) -> Result<SlitEigenProblem> {
    if !(rz > 0.0) || cells < 4 {
        return Err(SpectrumError::InvalidArgument(format!(
            "need R_z > 0 and four or more cells, got R_z = {rz}, cells = {cells}"
        )));
    }
    let h = rz / cells as f64;
    let n = cells as isize;
    let j_lo = match symmetry {
        Symmetry::Reduced => 0,
        Symmetry::Full => -(n - 1),
    };
    let width = (n - 1 - j_lo + 1) as usize;
    let mut nodes = Vec::new();
    for i in 1..cells {
        for j in j_lo..n {
            nodes.push((i, j));
        }
    }
    let pos = |i: usize, j: isize| -> Option<usize> {
        (i >= 1 && i < cells && j >= j_lo && j < n).then(|| (i - 1) * width + (j - j_lo) as usize)
    };
    let half = |j: isize| if symmetry == Symmetry::Reduced && j == 0 { 0.5 } else { 1.0 };
    let mut stiffness = SymBanded::zeros(nodes.len(), width);
    let mut mass = vec![0.0; nodes.len()];
    for (p, &(i, j)) in nodes.iter().enumerate() {
        let (z1, z2) = (i as f64 * h, j as f64 * h);
        mass[p] = 8.0 * (z1 * z1 + z2 * z2) * weight(z1, z2) * h * h * half(j);
    }
    // Each edge once: to the right in z_1 and up in z_2, from every grid
    // node that touches an unknown.
    for i in 0..=cells {
        for j in j_lo - 1..=n {
            let here = pos(i, j);
            let (z1, z2) = (i as f64 * h, j as f64 * h);
            for (di, dj) in [(1usize, 0isize), (0, 1)] {
                let (i2, j2) = (i + di, j + dj);
                if i2 > cells || j2 > n {
                    continue;
                }
                let there = pos(i2, j2);
                if here.is_none() && there.is_none() {
                    continue;
                }
                let w = weight(z1 + 0.5 * h * di as f64, z2 + 0.5 * h * dj as f64)
                    * if dj == 0 { half(j) } else { 1.0 };
                match (here, there) {
                    (Some(p), Some(q)) => {
                        stiffness.add(p, p, w)?;
                        stiffness.add(q, q, w)?;
                        stiffness.add(p.max(q), p.min(q), -w)?;
                    }
                    (Some(p), None) | (None, Some(p)) => {
                        // Reduced symmetry has no unknowns below z_2 = 0;
                        // the edge from z_2 = -h is not part of the domain.
                        if symmetry == Symmetry::Reduced && (j < 0 || j2 < 0) {
                            continue;
                        }
                        stiffness.add(p, p, w)?;
                    }
                    (None, None) => unreachable!(),
                }
            }
        }
    }
    Ok(SlitEigenProblem {
        rz,
        cells,
        symmetry,
        nodes,
        stiffness,
        mass,
    })
}

impl SlitEigenProblem {
    pub fn rz(&self) -> f64 {
        self.rz
    }

    pub fn spacing(&self) -> f64 {
        self.rz / self.cells as f64
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn stiffness(&self) -> &SymBanded {
        &self.stiffness
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `(z_1, z_2)` of every unknown.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let h = self.spacing();
        self.nodes
            .iter()
            .map(|&(i, j)| (i as f64 * h, j as f64 * h))
            .collect()
    }

    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.points().into_iter().map(|(a, b)| f(a, b)).collect()
    }

    pub fn b_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mass.iter().zip(x.iter().zip(y)).map(|(w, (a, b))| w * a * b).sum()
    }

    /// `|A x - lambda B x| / |lambda B x|` in the Euclidean norm.
    pub fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        let ax = self.stiffness.mul_vec(x);
        let (mut num, mut den) = (0.0, 0.0);
        for ((a, b), v) in ax.iter().zip(&self.mass).zip(x) {
            num += (a - lambda * b * v).powi(2);
            den += (lambda * b * v).powi(2);
        }
        (num / den).sqrt()
    }

    /// `B`-weighted mean of `x(z_1, -z_2) x(z_1, z_2)` over `|x|_B^2`:
    /// `1` for even and `-1` for odd vectors.
    pub fn parity(&self, x: &[f64]) -> f64 {
        if self.symmetry == Symmetry::Reduced {
            return 1.0;
        }
        let index: std::collections::HashMap<(usize, isize), usize> =
            self.nodes.iter().enumerate().map(|(p, n)| (*n, p)).collect();
        let mut s = 0.0;
        for (p, &(i, j)) in self.nodes.iter().enumerate() {
            s += self.mass[p] * x[p] * x[index[&(i, -j)]];
        }
        s / self.b_inner(x, x)
    }

    /// The vector as a field on the half-plane grid whose tangential axis
    /// is `z_2` and whose normal axis is `z_1`, extended evenly and by
    /// zero on the Dirichlet lines.
    pub fn to_field(&self, x: &[f64]) -> Result<WeightedField> {
        let grid = make_grid(2, self.rz, self.spacing())?;
        let mut values = vec![0.0; grid.len()];
        let n = self.cells as isize;
        for (p, &(i, j)) in self.nodes.iter().enumerate() {
            for jj in [j, -j] {
                values[grid.index(&[(jj + n) as usize, i])] = x[p];
            }
        }
        Ok(WeightedField::new(grid, values, 0.0)?)
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// `B`-orthonormal eigenvectors.
    pub vectors: Vec<Vec<f64>>,
}

/// The `k` smallest eigenpairs among modes even in `z_2`, by shift-invert
/// subspace iteration. Under `Full` symmetry odd modes are computed and
/// discarded.
pub fn solve_lowest(problem: &SlitEigenProblem, k: usize) -> Result<Spectrum> {
    if k == 0 {
        return Err(SpectrumError::InvalidArgument("k must be at least 1".into()));
    }
    let opts = EigenOptions {
        tol: 1e-10,
        ..EigenOptions::default()
    };
    let mut want = k;
    loop {
        let pairs = lowest_eigenpairs(problem.stiffness(), problem.mass(), want, opts)?;
        let mut out = Spectrum {
            values: Vec::new(),
            vectors: Vec::new(),
        };
        for (v, x) in pairs.values.iter().zip(pairs.vectors) {
            if problem.parity(&x) > 0.5 && out.values.len() < k {
                out.values.push(*v);
                out.vectors.push(x);
            }
        }
        if out.values.len() == k {
            return Ok(out);
        }
        if want >= problem.len() {
            return Err(SpectrumError::InvalidArgument(format!(
                "only {} even modes exist",
                out.values.len()
            )));
        }
        want = (2 * want).min(problem.len());
    }
}

/// `<x, y>_B / (|x|_B |y|_B)`.
pub fn correlation(problem: &SlitEigenProblem, x: &[f64], y: &[f64]) -> f64 {
    problem.b_inner(x, y) / (problem.b_inner(x, x) * problem.b_inner(y, y)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanReport {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Correlation of the ground state with `z_1`, the pullback of
    /// `Re(y_1 + i|y_2|)^{1/2}`.
    pub ground_correlation: f64,
    /// Correlation of the second mode with `Re(z^3) = z_1^3 - 3 z_1 z_2^2`,
    /// the pullback of `Re(y_1 + i|y_2|)^{3/2}`.
    pub second_correlation: f64,
    /// Share of the second mode's squared norm captured by the pullback.
    pub captured: f64,
    pub residuals: [f64; 2],
    /// `|<x_1, x_2>_B|`.
    pub orthogonality: f64,
    /// Coefficient `b` of the local expansion `b z_1 (z_2^2 - z_1^2/3)` of
    /// the unit-norm second mode, fitted on the nodes with `|z| <= 4h`.
    pub expansion_b: f64,
}

/// Compare the two lowest even modes with their closed forms. Fails when
/// the second eigenvalue is within `cluster_gap` of a neighbor.
pub fn verify_eigenspace(
    problem: &SlitEigenProblem,
    spectrum: &Spectrum,
    cluster_gap: f64,
) -> Result<SpanReport> {
    if spectrum.values.len() < 2 {
        return Err(SpectrumError::InvalidArgument("need two eigenpairs".into()));
    }
    let v = &spectrum.values;
    for w in v.windows(2).take(2) {
        if (w[1] - w[0]).abs() < cluster_gap {
            return Err(SpectrumError::Degenerate(w[0], w[1]));
        }
    }
    let (x1, x2) = (&spectrum.vectors[0], &spectrum.vectors[1]);
    let ground = problem.sample(|a, _| a);
    let third = problem.sample(|a, b| a * a * a - 3.0 * a * b * b);
    let second_correlation = correlation(problem, x2, &third).abs();

    let h = problem.spacing();
    let shape = |a: f64, b: f64| a * (b * b - a * a / 3.0);
    let (mut num, mut den) = (0.0, 0.0);
    let norm = problem.b_inner(x2, x2).sqrt();
    let sign = problem.b_inner(x2, &third).signum();
    for ((a, b), x) in problem.points().into_iter().zip(x2) {
        if a.hypot(b) <= 4.0 * h + 1e-12 {
            let s = shape(a, b);
            num += s * sign * x / norm;
            den += s * s;
        }
    }
    Ok(SpanReport {
        lambda1: v[0],
        lambda2: v[1],
        ground_correlation: correlation(problem, x1, &ground).abs(),
        second_correlation,
        captured: second_correlation * second_correlation,
        residuals: [problem.residual(v[0], x1), problem.residual(v[1], x2)],
        orthogonality: problem.b_inner(x1, x2).abs(),
        expansion_b: num / den,
    })
}
