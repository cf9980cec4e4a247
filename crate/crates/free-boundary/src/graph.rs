use serde::Serialize;

use crate::contact::ContactSet;
use crate::{FbError, Result};

/// Part of the boundary slab in which the free boundary is sought as a
/// graph `x_2 = g(x_1, t)` (three dimensions, boundary coordinates
/// `(x_1, x_2)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphWindow {
    pub x1: [f64; 2],
    pub t: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSample {
    pub x1: f64,
    pub t: f64,
    pub g: f64,
    pub dg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderRow {
    pub theta: f64,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphReport {
    pub samples: Vec<GraphSample>,
    pub holder: Vec<HolderRow>,
    /// Largest swept exponent whose quotient stays within
    /// `HOLDER_GROWTH` times the quotient at the smallest exponent; `1`
    /// when every quotient vanishes.
    pub theta_hat: f64,
    /// Least-squares slope of `g` against `x_1` over all samples.
    pub mean_slope: f64,
}

/// Exponents of the Hölder sweep.
pub fn theta_sweep() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.05).collect()
}

pub const HOLDER_GROWTH: f64 = 10.0;

/// The crossing of `x_2` between the last node on one side and the first
/// on the other. Off the contact set the trace grows like `d^{3/2}` in the
/// distance `d` to the free boundary, so the two nearest positive values
/// `u_1`, `u_2` at `x_a`, `x_b` locate it at `(x_a - rho x_b)/(1 - rho)`
/// with `rho = (u_1/u_2)^{2/3}`, clamped to the cell.
fn crossing(lo: f64, hi: f64, near: (f64, f64), far: Option<(f64, f64)>) -> f64 {
    let clamp = |x: f64| x.clamp(lo.min(hi), lo.max(hi));
    match far {
        Some((xb, ub)) if near.1 > 0.0 && ub > near.1 => {
            let rho = (near.1 / ub).powf(2.0 / 3.0);
            clamp((near.0 - rho * xb) / (1.0 - rho))
        }
        _ => 0.5 * (lo + hi),
    }
}

/// Hölder quotients `max |a(p) - a(q)| / d(p, q)^theta` with the parabolic
/// distance `d = |x - y| + |t - s|^{1/2}`.
pub fn holder_quotients(points: &[(Vec<f64>, f64)], values: &[Vec<f64>], thetas: &[f64]) -> Vec<HolderRow> {
    thetas
        .iter()
        .map(|&theta| {
            let mut q: f64 = 0.0;
            for i in 0..points.len() {
                for j in i + 1..points.len() {
                    let dx: f64 = points[i]
                        .0
                        .iter()
                        .zip(&points[j].0)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    let d = dx + (points[i].1 - points[j].1).abs().sqrt();
                    if d == 0.0 {
                        continue;
                    }
                    let dv: f64 = values[i]
                        .iter()
                        .zip(&values[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    q = q.max(dv / d.powf(theta));
                }
            }
            HolderRow { theta, quotient: q }
        })
        .collect()
}

pub fn theta_estimate(rows: &[HolderRow]) -> f64 {
    let base = rows.first().map_or(0.0, |r| r.quotient);
    if rows.iter().all(|r| r.quotient == 0.0) {
        return 1.0;
    }
    rows.iter()
        .filter(|r| r.quotient <= HOLDER_GROWTH * base)
        .map(|r| r.theta)
        .fold(0.0, f64::max)
}

/// Reconstruct `x_2 = g(x_1, t)` from the contact flags: in every column
/// `(x_1, t)` of the window the flag must flip exactly once along `x_2`.
/// Columns with no flip or several are collected and reported as an error.
pub fn reconstruct_graph(contact: &ContactSet, window: GraphWindow) -> Result<GraphReport> {
    let f = &contact.field;
    if f.axes().len() != 2 {
        return Err(FbError::InvalidArgument(
            "graph reconstruction needs a three-dimensional solution".into(),
        ));
    }
    let (ax1, ax2) = (f.axes()[0], f.axes()[1]);
    let inside = |v: f64, r: [f64; 2]| v >= r[0] - 1e-12 && v <= r[1] + 1e-12;
    let cols: Vec<usize> = (0..ax1.count).filter(|&i| inside(ax1.coord(i), window.x1)).collect();
    let times: Vec<usize> = (0..f.times().len())
        .filter(|&k| inside(f.times()[k], window.t))
        .collect();
    if cols.len() < 2 || times.is_empty() {
        return Err(FbError::InvalidArgument("window holds no columns".into()));
    }
    let mut bad = Vec::new();
    let mut g = vec![vec![0.0; cols.len()]; times.len()];
    for (kt, &k) in times.iter().enumerate() {
        for (kc, &i) in cols.iter().enumerate() {
            let node = |j: usize| f.index(&[k, i, j]);
            let flips: Vec<usize> = (0..ax2.count - 1)
                .filter(|&j| contact.contact[node(j)] != contact.contact[node(j + 1)])
                .collect();
            if flips.len() != 1 {
                bad.push((ax1.coord(i), f.times()[k]));
                continue;
            }
            let j = flips[0];
            let (lo, hi) = (ax2.coord(j), ax2.coord(j + 1));
            let val = |j: usize| (ax2.coord(j), f.values()[node(j)]);
            g[kt][kc] = if contact.contact[node(j)] {
                crossing(lo, hi, val(j + 1), (j + 2 < ax2.count).then(|| val(j + 2)))
            } else {
                crossing(lo, hi, val(j), j.checked_sub(1).map(val))
            };
        }
    }
    if !bad.is_empty() {
        return Err(FbError::NonGraphical(bad));
    }
    let mut samples = Vec::new();
    let h = ax1.step;
    let last = cols.len() - 1;
    for (kt, &k) in times.iter().enumerate() {
        let row = &g[kt];
        for kc in 0..cols.len() {
            let dg = if kc == 0 {
                (row[1] - row[0]) / h
            } else if kc == last {
                (row[last] - row[last - 1]) / h
            } else {
                (row[kc + 1] - row[kc - 1]) / (2.0 * h)
            };
            samples.push(GraphSample {
                x1: ax1.coord(cols[kc]),
                t: f.times()[k],
                g: row[kc],
                dg,
            });
        }
    }
    let points: Vec<(Vec<f64>, f64)> = samples.iter().map(|s| (vec![s.x1], s.t)).collect();
    let grads: Vec<Vec<f64>> = samples.iter().map(|s| vec![s.dg]).collect();
    let holder = holder_quotients(&points, &grads, &theta_sweep());
    let theta_hat = theta_estimate(&holder);
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.x1).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.g).sum::<f64>() / n;
    let sxy: f64 = samples.iter().map(|s| (s.x1 - mx) * (s.g - my)).sum();
    let sxx: f64 = samples.iter().map(|s| (s.x1 - mx).powi(2)).sum();
    Ok(GraphReport {
        samples,
        holder,
        theta_hat,
        mean_slope: sxy / sxx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_is_exact_for_three_halves_growth() {
        let g0 = 0.13;
        let u = |x: f64| (x - g0).max(0.0).powf(1.5);
        let x = crossing(0.1, 0.2, (0.2, u(0.2)), Some((0.3, u(0.3))));
        assert!((x - g0).abs() < 1e-12);
        let x = crossing(0.1, 0.2, (0.2, u(0.2)), None);
        assert!((x - 0.15).abs() < 1e-15);
    }

    #[test]
    fn constant_values_have_zero_quotients() {
        let pts = vec![(vec![0.0], -1.0), (vec![0.5], -0.5)];
        let rows = holder_quotients(&pts, &[vec![2.0], vec![2.0]], &theta_sweep());
        assert!(rows.iter().all(|r| r.quotient == 0.0));
        assert_eq!(theta_estimate(&rows), 1.0);
    }
}
