//! Regenerates `data/normalizers.json` by direct trapezoid quadrature on
//! fine half-space grids. Output goes to stdout.

use exact_solutions::goldens::{GoldenEntry, GoldenFile, FORMAT_VERSION};
use exact_solutions::{h2m_unnormalized, hermite_basis, hermite_poly, profile_shape};

/// Trapezoid sum of `f(y) e^{-|y|^2}` over `[-R, R]^{n-1} x [0, R]`.
fn half_space_integral(n: usize, r: f64, h: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
    let c = (r / h).round() as i64;
    let w = |i: i64| if i.abs() == c { 0.5 } else { 1.0 };
    let mut acc = 0.0;
    let mut y = vec![0.0; n];
    let tangential = (2 * c + 1).pow((n - 1) as u32);
    for t in 0..tangential {
        let mut rest = t;
        let mut wt = 1.0;
        for a in 0..n - 1 {
            let i = rest % (2 * c + 1) - c;
            rest /= 2 * c + 1;
            y[a] = i as f64 * h;
            wt *= w(i);
        }
        for k in 0..=c {
            y[n - 1] = k as f64 * h;
            let wk = if k == 0 || k == c { 0.5 } else { 1.0 };
            let r2: f64 = y.iter().map(|v| v * v).sum();
            acc += wt * wk * f(&y) * (-r2).exp();
        }
    }
    acc * h.powi(n as i32)
}

fn main() {
    let mut entries = Vec::new();

    // The profile is singular at the slit edge, so it needs a fine grid. It
    // does not depend on y_2 when n = 3, which reduces that case to the
    // planar integral times a one-dimensional Gaussian sum.
    let (r, h) = (6.0, 0.001);
    let planar = half_space_integral(2, r, h, |y| profile_shape(y[0], y[1]).powi(2));
    let c = (r / h).round() as i64;
    let line: f64 = (-c..=c)
        .map(|i| {
            let x = i as f64 * h;
            let w = if i.abs() == c { 0.5 } else { 1.0 };
            w * (-x * x).exp()
        })
        .sum::<f64>()
        * h;
    for (n, sq) in [(2, planar), (3, planar * line)] {
        entries.push(GoldenEntry {
            quantity: "profile".into(),
            n,
            m: 0,
            alpha: None,
            radius: r,
            h,
            value: 1.0 / sq.sqrt(),
        });
    }

    // Gaussian-weighted polynomials: the trapezoid rule converges
    // spectrally, so a moderate grid is enough.
    let (r, h) = (7.0, 0.05);
    for n in [2usize, 3] {
        for m in 1..=4usize {
            let sq = half_space_integral(n, r, h, |y| h2m_unnormalized(m, y).powi(2));
            entries.push(GoldenEntry {
                quantity: "h2m".into(),
                n,
                m,
                alpha: None,
                radius: r,
                h,
                value: sq.sqrt(),
            });
        }
        for alpha in hermite_basis(n, 0..=4) {
            let sq = half_space_integral(n, r, h, |y| {
                alpha
                    .iter()
                    .zip(y)
                    .map(|(&k, &x)| hermite_poly(k, x))
                    .product::<f64>()
                    .powi(2)
            });
            entries.push(GoldenEntry {
                quantity: "hermite".into(),
                n,
                m: 0,
                alpha: Some(alpha),
                radius: r,
                h,
                value: 1.0 / sq.sqrt(),
            });
        }
    }

    let file = GoldenFile {
        version: FORMAT_VERSION,
        entries,
    };
    println!("{}", serde_json::to_string_pretty(&file).unwrap());
}
