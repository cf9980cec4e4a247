/// Backward heat kernel `G(x, t) = (-4 pi t)^{-n/2} e^{|x|^2 / (4t)}` for
/// `t < 0`, and `0` for `t >= 0`. The dimension is `x.len()`.
pub fn eval_kernel(x: &[f64], t: f64) -> f64 {
    if t >= 0.0 {
        return 0.0;
    }
    let n = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (-4.0 * std::f64::consts::PI * t).powf(-0.5 * n) * (r2 / (4.0 * t)).exp()
}
