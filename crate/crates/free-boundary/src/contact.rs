use conformal_transform::OriginalSolution;
use serde::Serialize;

use crate::{FbError, Result};

/// Uniformly spaced coordinates `start + k step`, `k < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    /// `count` points from `lo` to `hi` inclusive.
    pub fn span(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !(hi > lo) {
            return Err(FbError::InvalidArgument(format!(
                "axis [{lo}, {hi}] with {count} points"
            )));
        }
        Ok(Self {
            start: lo,
            step: (hi - lo) / (count - 1) as f64,
            count,
        })
    }

    pub fn coord(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.coord(k)).collect()
    }
}

/// Samples of `u(x', 0, t)` on a tensor grid of the boundary slab.
///
/// Node order: time slowest, then the boundary axes in order, the last one
/// fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTimeField {
    axes: Vec<Axis>,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl BoundaryTimeField {
    pub fn new(axes: Vec<Axis>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || times.is_empty() {
            return Err(FbError::InvalidArgument("empty boundary-time grid".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FbError::InvalidArgument("times must increase".into()));
        }
        let len = times.len() * axes.iter().map(|a| a.count).product::<usize>();
        if values.len() != len {
            return Err(FbError::InvalidArgument(format!(
                "{} values for {len} nodes",
                values.len()
            )));
        }
        Ok(Self { axes, times, values })
    }

    /// Evaluate `u` on the boundary `{x_n = 0}` of an `n`-dimensional
    /// solution, `n = axes.len() + 1`.
    pub fn sample<U: OriginalSolution + ?Sized>(
        u: &U,
        axes: Vec<Axis>,
        times: Vec<f64>,
    ) -> Result<Self> {
        if u.dim() != axes.len() + 1 {
            return Err(FbError::InvalidArgument(format!(
                "{} boundary axes for a solution in dimension {}",
                axes.len(),
                u.dim()
            )));
        }
        let nodes: usize = axes.iter().map(|a| a.count).product();
        let mut values = Vec::with_capacity(nodes * times.len());
        let mut x = vec![0.0; u.dim()];
        for &t in &times {
            for node in 0..nodes {
                let mut rest = node;
                for a in (0..axes.len()).rev() {
                    x[a] = axes[a].coord(rest % axes[a].count);
                    rest /= axes[a].count;
                }
                let v = u.eval(&x, t).ok_or_else(|| FbError::OutsideData {
                    x: x.clone(),
                    t,
                })?;
                values.push(v);
            }
        }
        Self::new(axes, times, values)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nodes_per_slice(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Time index followed by one index per boundary axis.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len() + 1];
        for a in (0..self.axes.len()).rev() {
            out[a + 1] = idx % self.axes[a].count;
            idx /= self.axes[a].count;
        }
        out[0] = idx;
        out
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        let mut idx = multi[0];
        for (a, axis) in self.axes.iter().enumerate() {
            idx = idx * axis.count + multi[a + 1];
        }
        idx
    }

    /// `(x', t)` of a node.
    pub fn point(&self, idx: usize) -> (Vec<f64>, f64) {
        let m = self.multi_index(idx);
        let x = self
            .axes
            .iter()
            .zip(&m[1..])
            .map(|(a, k)| a.coord(*k))
            .collect();
        (x, self.times[m[0]])
    }

    /// Indices of the nodes one step away along any axis or in time.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let m = self.multi_index(idx);
        let counts: Vec<usize> = std::iter::once(self.times.len())
            .chain(self.axes.iter().map(|a| a.count))
            .collect();
        let mut out = Vec::new();
        for (a, &c) in counts.iter().enumerate() {
            for delta in [-1isize, 1] {
                let k = m[a] as isize + delta;
                if k >= 0 && (k as usize) < c {
                    let mut nm = m.clone();
                    nm[a] = k as usize;
                    out.push(self.index(&nm));
                }
            }
        }
        out
    }
}

/// The contact set `{u = 0}` on the boundary slab and its topological
/// boundary.
///
/// A node is flagged when `|u| <= threshold`. A node belongs to the free
/// boundary when its closed neighborhood, the node itself and its axis
/// neighbors, holds both flagged and unflagged nodes.
#[derive(Debug, Clone)]
pub struct ContactSet {
    pub field: BoundaryTimeField,
    pub threshold: f64,
    pub contact: Vec<bool>,
    pub free_boundary: Vec<bool>,
}

impl ContactSet {
    pub fn contact_count(&self) -> usize {
        self.contact.iter().filter(|c| **c).count()
    }

    pub fn free_boundary_points(&self) -> Vec<(Vec<f64>, f64)> {
        self.free_boundary
            .iter()
            .enumerate()
            .filter(|(_, f)| **f)
            .map(|(i, _)| self.field.point(i))
            .collect()
    }
}

pub fn extract_contact(field: &BoundaryTimeField, threshold: f64) -> Result<ContactSet> {
    if !(threshold > 0.0) {
        return Err(FbError::InvalidArgument(format!(
            "contact threshold must be positive, got {threshold}"
        )));
    }
    let contact: Vec<bool> = field.values().iter().map(|v| v.abs() <= threshold).collect();
    let free_boundary = (0..field.len())
        .map(|i| {
            field
                .neighbors(i)
                .into_iter()
                .any(|j| contact[j] != contact[i])
        })
        .collect();
    Ok(ContactSet {
        field: field.clone(),
        threshold,
        contact,
        free_boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let axes = vec![Axis::span(-1.0, 1.0, 5).unwrap(), Axis::span(0.0, 1.0, 3).unwrap()];
        let f = BoundaryTimeField::new(axes, vec![-2.0, -1.0], vec![0.0; 30]).unwrap();
        for i in 0..f.len() {
            assert_eq!(f.index(&f.multi_index(i)), i);
        }
        let (x, t) = f.point(f.index(&[1, 4, 2]));
        assert_eq!((x, t), (vec![1.0, 1.0], -1.0));
        assert_eq!(f.neighbors(0).len(), 3);
    }

    #[test]
    fn rejects_bad_threshold() {
        let axes = vec![Axis::span(-1.0, 1.0, 3).unwrap()];
        let f = BoundaryTimeField::new(axes, vec![-1.0], vec![0.0; 3]).unwrap();
        assert!(extract_contact(&f, 0.0).is_err());
    }
}
