//! Symmetric banded matrices, their Cholesky factors, and a shift-invert
//! subspace iteration for the lowest eigenpairs of `A x = lambda B x` with a
//! diagonal positive `B`.
//!
//! Storage is the lower band: row `i` keeps columns `i - bw ..= i`.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("entry ({row}, {col}) lies outside the band of width {bw}")]
    OutsideBand { row: usize, col: usize, bw: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigensolver did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

#[derive(Debug, Clone, PartialEq)]
pub struct SymBanded {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn slot(&self, i: usize, j: usize) -> Result<usize> {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i >= self.n || i - j > self.bw {
            return Err(LinalgError::OutsideBand {
                row: i,
                col: j,
                bw: self.bw,
            });
        }
        Ok(i * (self.bw + 1) + (j + self.bw - i))
    }

    /// Add `v` to the symmetric pair `(i, j)`, `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        let s = self.slot(i, j)?;
        self.data[s] += v;
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map(|s| self.data[s]).unwrap_or(0.0)
    }

    /// Add `alpha * d` to the diagonal.
    pub fn add_diagonal(&mut self, alpha: f64, d: &[f64]) -> Result<()> {
        if d.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                got: d.len(),
            });
        }
        for (i, v) in d.iter().enumerate() {
            self.data[i * (self.bw + 1) + self.bw] += alpha * v;
        }
        Ok(())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let bw = self.bw;
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * (bw + 1)..(i + 1) * (bw + 1)];
            let j0 = i.saturating_sub(bw);
            let mut acc = row[bw] * x[i];
            for j in j0..i {
                let a = row[j + bw - i];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += acc;
        }
        y
    }

    /// Dense copy, for small systems and tests.
    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Cholesky factorization `A = L L^T`; `L` keeps the same band.
    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let bw = self.bw;
        let w = bw + 1;
        let mut l = self.data.clone();
        for i in 0..self.n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut s = l[i * w + j + bw - i];
                for k in k0..j {
                    s -= l[i * w + k + bw - i] * l[j * w + k + bw - j];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(LinalgError::NotPositiveDefinite { pivot: i, value: s });
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + j + bw - i] = s / l[j * w + bw];
                }
            }
        }
        Ok(BandedCholesky { n: self.n, bw, l })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        if b.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                got: b.len(),
            });
        }
        let (bw, w) = (self.bw, self.bw + 1);
        for i in 0..self.n {
            let j0 = i.saturating_sub(bw);
            let row = &self.l[i * w..(i + 1) * w];
            let mut s = b[i];
            for j in j0..i {
                s -= row[j + bw - i] * b[j];
            }
            b[i] = s / row[bw];
        }
        for i in (0..self.n).rev() {
            let row = &self.l[i * w..(i + 1) * w];
            b[i] /= row[bw];
            let xi = b[i];
            for j in i.saturating_sub(bw)..i {
                b[j] -= row[j + bw - i] * xi;
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    /// `ln det A`.
    pub fn log_det(&self) -> f64 {
        (0..self.n)
            .map(|i| 2.0 * self.l[i * (self.bw + 1) + self.bw].ln())
            .sum()
    }
}

/// Options for [`lowest_eigenpairs`].
#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Spectral shift; must lie below the wanted eigenvalues and avoid them.
    pub shift: f64,
    /// Relative residual tolerance `|A x - lambda B x|_B* / |lambda|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra subspace vectors beyond the requested count.
    pub guard: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            shift: 0.0,
            tol: 1e-10,
            max_iter: 500,
            guard: 6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// `B`-orthonormal eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    pub iterations: usize,
}

fn b_dot(b: &[f64], x: &[f64], y: &[f64]) -> f64 {
    b.iter().zip(x.iter().zip(y)).map(|(w, (p, q))| w * p * q).sum()
}

/// Lowest `k` eigenpairs of `A x = lambda B x`, `B = diag(b)` positive.
pub fn lowest_eigenpairs(
    a: &SymBanded,
    b: &[f64],
    k: usize,
    opts: EigenOptions,
) -> Result<EigenPairs> {
    let n = a.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if k == 0 || k > n {
        return Err(LinalgError::InvalidArgument(format!(
            "cannot extract {k} eigenpairs of a {n}x{n} pencil"
        )));
    }
    if b.iter().any(|v| !(*v > 0.0)) {
        return Err(LinalgError::InvalidArgument("B must be positive".into()));
    }
    let p = (k + opts.guard).min(n);
    let mut shifted = a.clone();
    shifted.add_diagonal(-opts.shift, b)?;
    let fac = shifted.cholesky()?;

    // Deterministic, generic start vectors.
    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|c| {
            (0..n)
                .map(|i| ((i as f64 + 1.0) * (0.7548776662 + 0.5698402910 * c as f64)).sin())
                .collect()
        })
        .collect();
    let mut values = vec![0.0; p];
    for it in 1..=opts.max_iter {
        let y: Vec<Vec<f64>> = x
            .iter()
            .map(|v| {
                let bv: Vec<f64> = v.iter().zip(b).map(|(p, q)| p * q).collect();
                fac.solve(&bv)
            })
            .collect::<Result<_>>()?;
        let ay: Vec<Vec<f64>> = y.iter().map(|v| a.mul_vec(v)).collect();
        let ah = DMatrix::from_fn(p, p, |i, j| y[i].iter().zip(&ay[j]).map(|(u, v)| u * v).sum());
        let bh = DMatrix::from_fn(p, p, |i, j| b_dot(b, &y[i], &y[j]));
        let ah = (&ah + ah.transpose()) * 0.5;
        let bh = (&bh + bh.transpose()) * 0.5;
        let chol = nalgebra::Cholesky::new(bh).ok_or_else(|| {
            LinalgError::InvalidArgument("subspace collapsed during iteration".into())
        })?;
        let linv = chol
            .l()
            .try_inverse()
            .ok_or_else(|| LinalgError::InvalidArgument("singular subspace Gram".into()))?;
        let c = &linv * ah * linv.transpose();
        let eig = SymmetricEigen::new((&c + c.transpose()) * 0.5);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let coeff = linv.transpose() * &eig.eigenvectors;
        let mut nx = vec![vec![0.0; n]; p];
        for (slot, &col) in order.iter().enumerate() {
            values[slot] = eig.eigenvalues[col];
            for (r, yr) in y.iter().enumerate() {
                let c = coeff[(r, col)];
                for (dst, src) in nx[slot].iter_mut().zip(yr) {
                    *dst += c * src;
                }
            }
        }
        x = nx;
        let mut converged = true;
        for (j, xj) in x.iter().enumerate().take(k) {
            let ax = a.mul_vec(xj);
            let res: f64 = ax
                .iter()
                .zip(xj.iter().zip(b))
                .map(|(av, (xv, bv))| {
                    let r = av - values[j] * bv * xv;
                    r * r / bv
                })
                .sum::<f64>()
                .sqrt();
            if res > opts.tol * values[j].abs().max(1e-300) {
                converged = false;
                break;
            }
        }
        if converged {
            return Ok(EigenPairs {
                values: values[..k].to_vec(),
                vectors: x[..k].to_vec(),
                iterations: it,
            });
        }
    }
    Err(LinalgError::NoConvergence(opts.max_iter))
}
