use serde::Serialize;

use crate::{DiagError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `W(tau) = W_0 e^{-gamma tau}`.
    Exponential,
    /// `W(tau + 1) = (1 - c_0) W(tau)`.
    Contraction,
    /// `W(tau) <= C / ((A_0 + c_0 tau) |ln(A_0 + c_0 tau)|^2)`.
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub gamma: Option<f64>,
    pub c0: Option<f64>,
    pub c: Option<f64>,
    pub a0: Option<f64>,
    pub window: [f64; 2],
    pub samples: usize,
    pub r_squared: f64,
    /// Fraction of window samples where the logarithmic bound holds.
    pub bound_fraction: Option<f64>,
}

const MIN_SAMPLES: usize = 5;

fn select(tau: &[f64], w: &[f64], window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    if tau.len() != w.len() {
        return Err(DiagError::InvalidArgument(
            "tau and energy series differ in length".into(),
        ));
    }
    let (t, v): (Vec<f64>, Vec<f64>) = tau
        .iter()
        .zip(w)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, v)| (*t, *v))
        .unzip();
    if t.len() < MIN_SAMPLES {
        return Err(DiagError::TooShort(format!(
            "{} samples in [{}, {}], need {MIN_SAMPLES}",
            t.len(),
            window.0,
            window.1
        )));
    }
    if let Some((tau, value)) = t.iter().zip(&v).find(|(_, v)| !(**v > 0.0)) {
        return Err(DiagError::NonPositive {
            tau: *tau,
            value: *value,
        });
    }
    Ok((t, v))
}

/// Least squares `y = a + b x`; returns `(a, b, R^2)`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let scale = y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    let r2 = if ss_tot <= 1e-24 * scale {
        if ss_res <= 1e-24 * scale {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    (a, b, r2)
}

/// Least squares of `ln W` against `tau` on the window.
pub fn fit_exponential(tau: &[f64], w: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    let (t, v) = select(tau, w, window)?;
    let logs: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let (_, slope, r2) = linear_fit(&t, &logs);
    Ok(DecayFit {
        model: DecayModel::Exponential,
        gamma: Some(-slope),
        c0: None,
        c: None,
        a0: None,
        window: [window.0, window.1],
        samples: t.len(),
        r_squared: r2,
        bound_fraction: None,
    })
}

/// Logarithmic decay law.
///
/// `A_0 = 1 / G(W(tau_0))` at the first window sample and `C = 1`, the
/// constant produced by inverting `G` in the comparison argument. `c_0` is
/// the largest constant with `1/G(W(tau)) >= A_0 + c_0 (tau - tau_0)` at
/// every sample, and `R^2` measures how linear `1/G(W)` is in `tau`.
pub fn fit_logarithmic(tau: &[f64], w: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    let (t, v) = select(tau, w, window)?;
    let inv_g: Vec<f64> = v.iter().map(|x| 1.0 / log_g(*x)).collect();
    let a0 = inv_g[0];
    let c0 = t
        .iter()
        .zip(&inv_g)
        .skip(1)
        .map(|(s, g)| (g - a0) / (s - t[0]))
        .fold(f64::INFINITY, f64::min);
    let held = t
        .iter()
        .zip(&v)
        .filter(|(s, w)| {
            let arg = a0 + c0 * (**s - t[0]);
            let bound = 1.0 / (arg * arg.ln().powi(2));
            **w <= bound * (1.0 + 1e-12)
        })
        .count();
    let (_, _, r2) = linear_fit(&t, &inv_g);
    Ok(DecayFit {
        model: DecayModel::Logarithmic,
        gamma: None,
        c0: Some(c0),
        c: Some(1.0),
        a0: Some(a0),
        window: [window.0, window.1],
        samples: t.len(),
        r_squared: r2,
        bound_fraction: Some(held as f64 / t.len() as f64),
    })
}

pub fn fit_decay(
    tau: &[f64],
    w: &[f64],
    model: DecayModel,
    window: (f64, f64),
) -> Result<DecayFit> {
    match model {
        DecayModel::Exponential => fit_exponential(tau, w, window),
        DecayModel::Contraction => {
            let mut fit = fit_exponential(tau, w, window)?;
            fit.model = DecayModel::Contraction;
            fit.c0 = fit.gamma.map(|g| 1.0 - (-g).exp());
            Ok(fit)
        }
        DecayModel::Logarithmic => fit_logarithmic(tau, w, window),
    }
}

/// For a negative energy trace, the largest `gamma` with
/// `W(tau) <= W(tau_0) e^{gamma (tau - tau_0)}` at every sample.
pub fn envelope_rate(tau: &[f64], w: &[f64]) -> Result<f64> {
    if tau.len() != w.len() || tau.len() < 2 {
        return Err(DiagError::TooShort(
            "need at least two samples of equal length".into(),
        ));
    }
    if let Some((t, v)) = tau.iter().zip(w).find(|(_, v)| !(**v < 0.0)) {
        return Err(DiagError::InvalidArgument(format!(
            "energy must be negative, got {v} at tau = {t}"
        )));
    }
    Ok(tau
        .iter()
        .zip(w)
        .skip(1)
        .map(|(t, v)| (v / w[0]).ln() / (t - tau[0]))
        .fold(f64::INFINITY, f64::min))
}

/// `G(w) = w |ln w|^2`.
pub fn log_g(w: f64) -> f64 {
    w * w.ln().powi(2)
}

/// `F(s) = -1/(s (ln s)^2) - 2 int_{-ln s0}^{-ln s} e^u / u^3 du` for
/// `0 < s < s0 < 1`.
pub fn log_f(s: f64, s0: f64) -> Result<f64> {
    let tail = log_tail(s, s0)?;
    Ok(-1.0 / (s * s.ln().powi(2)) + tail)
}

/// `F'(s) = 1 / (s^2 |ln s|^2)`.
pub fn log_f_prime(s: f64) -> f64 {
    1.0 / (s * s * s.ln().powi(2))
}

/// `(-2 ln|ln s| / (s |ln s|^3), -2 int_{-ln s0}^{-ln s} e^u / u^3 du)`;
/// the second value should lie between the first and zero.
pub fn log_bracket(s: f64, s0: f64) -> Result<(f64, f64)> {
    let l = s.ln().abs();
    Ok((-2.0 * l.ln() / (s * l.powi(3)), log_tail(s, s0)?))
}

fn log_tail(s: f64, s0: f64) -> Result<f64> {
    if !(s > 0.0 && s < s0 && s0 < 1.0) {
        return Err(DiagError::InvalidArgument(format!(
            "need 0 < s < s0 < 1, got s = {s}, s0 = {s0}"
        )));
    }
    let f = |u: f64| u.exp() / u.powi(3);
    Ok(-2.0 * adaptive_simpson(&f, -s0.ln(), -s.ln(), 1e-13, 40))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    let tol = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    recurse(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let tau: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let w: Vec<f64> = tau.iter().map(|t| (-0.3 * t).exp()).collect();
        let fit = fit_exponential(&tau, &w, (0.0, 10.0)).unwrap();
        assert!((fit.gamma.unwrap() - 0.3).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_trace_has_zero_rate() {
        let tau: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let w = vec![0.7; 20];
        let fit = fit_exponential(&tau, &w, (0.0, 100.0)).unwrap();
        assert!(fit.gamma.unwrap().abs() < 1e-12);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn short_or_nonpositive_windows_are_errors() {
        let tau = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let w = [1.0, 0.5, 0.2, 0.1, 0.05, 0.02];
        assert!(matches!(
            fit_exponential(&tau, &w, (0.0, 2.0)),
            Err(DiagError::TooShort(_))
        ));
        let w = [1.0, 0.5, -0.2, 0.1, 0.05, 0.02];
        assert!(matches!(
            fit_exponential(&tau, &w, (0.0, 5.0)),
            Err(DiagError::NonPositive { .. })
        ));
    }

    #[test]
    fn contraction_factor_matches_rate() {
        let tau: Vec<f64> = (0..30).map(|k| k as f64 * 0.2).collect();
        let w: Vec<f64> = tau.iter().map(|t| 2.0 * (-0.5 * t).exp()).collect();
        let fit = fit_decay(&tau, &w, DecayModel::Contraction, (0.0, 6.0)).unwrap();
        assert!((fit.c0.unwrap() - (1.0 - (-0.5f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn envelope_of_exponential_growth() {
        let tau: Vec<f64> = (0..10).map(|k| k as f64 * 0.5).collect();
        let w: Vec<f64> = tau.iter().map(|t| -0.1 * (0.4 * t).exp()).collect();
        assert!((envelope_rate(&tau, &w).unwrap() - 0.4).abs() < 1e-12);
        assert!(envelope_rate(&tau, &[1.0; 10]).is_err());
    }
}
