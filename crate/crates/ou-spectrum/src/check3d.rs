use serde::Serialize;

/// `r^p cos(p theta)` for `w = a + i b`, `b > 0`, on the principal branch.
fn re_power(a: f64, b: f64, p: f64) -> f64 {
    let r = a.hypot(b);
    r.powf(p) * (p * b.atan2(a)).cos()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual3d {
    pub h: f64,
    /// `max |(L - 3/2) u| / max |3/2 u|` for `Re(y_2 + i|y_3|)^{3/2}`.
    pub profile: f64,
    /// The same for `y_1 Re(y_2 + i|y_3|)^{1/2}`.
    pub tilted: f64,
}

/// Strong residual of `L u = 3/2 u`, `L = -1/2 Lap + y . grad`, for the two
/// three-dimensional members of the second eigenspace, by centered
/// differences with step `h` on the nodes of `[-extent, extent]^2 x
/// (0, extent]` whose stencil stays in `{y_3 > 0}` and at distance at least
/// `edge_gap` from the slit edge `{y_2 = y_3 = 0}`.
pub fn residual_check_3d(h: f64, extent: f64, edge_gap: f64) -> Residual3d {
    let f1 = |y: [f64; 3]| re_power(y[1], y[2], 1.5);
    let f2 = |y: [f64; 3]| y[0] * re_power(y[1], y[2], 0.5);
    let k = (extent / h).round() as i64;
    let mut worst = [0.0f64; 2];
    let mut scale = [0.0f64; 2];
    for i in -k..=k {
        for j in -k..=k {
            for l in 2..=k {
                let y = [i as f64 * h, j as f64 * h, l as f64 * h];
                if y[1].hypot(y[2]) < edge_gap {
                    continue;
                }
                for (s, f) in [&f1 as &dyn Fn([f64; 3]) -> f64, &f2].into_iter().enumerate() {
                    let u = f(y);
                    let mut lap = 0.0;
                    let mut drift = 0.0;
                    for a in 0..3 {
                        let (mut p, mut m) = (y, y);
                        p[a] += h;
                        m[a] -= h;
                        let (up, um) = (f(p), f(m));
                        lap += (up - 2.0 * u + um) / (h * h);
                        drift += y[a] * (up - um) / (2.0 * h);
                    }
                    let r = -0.5 * lap + drift - 1.5 * u;
                    worst[s] = worst[s].max(r.abs());
                    scale[s] = scale[s].max((1.5 * u).abs());
                }
            }
        }
    }
    Residual3d {
        h,
        profile: worst[0] / scale[0],
        tilted: worst[1] / scale[1],
    }
}
