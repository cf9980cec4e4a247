use serde::Serialize;

use crate::fit::{fit_decay, fit_exponential, DecayFit, DecayModel};
use crate::trace::WeissTrace;
use crate::{DiagError, Result};

/// Which unit-time inequality the pairs are tested against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpiVariant {
    /// `W(tau+1) <= (1 - c0) W(tau)`, positive energy.
    Contraction,
    /// `W(tau+1) <= (1 + c0) W(tau)`, negative energy.
    NegativeGrowth,
    /// `W(tau+1) <= (1 - c0 W(tau+1) |ln W(tau+1)|^2) W(tau)`.
    Logarithmic,
    /// `W(tau+1) <= (1 - c0) W(tau) + 2 e^{-tau/2} M^2`.
    Forced { bound: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpiPair {
    pub tau: f64,
    pub w: f64,
    pub w_next: f64,
    /// Largest constant for which the inequality holds on this pair;
    /// `None` when `W(tau)` is zero within tolerance.
    pub implied_c0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpiReport {
    pub variant: EpiVariant,
    pub pairs: Vec<EpiPair>,
    pub min_c0: Option<f64>,
    /// Every pair was degenerate (energy identically zero).
    pub degenerate: bool,
    pub fit: Option<DecayFit>,
}

/// Linear interpolation of the series at `t`, which must lie in range.
fn value_at(tau: &[f64], w: &[f64], t: f64) -> f64 {
    let k = tau.partition_point(|s| *s <= t);
    if k == 0 {
        return w[0];
    }
    if k >= tau.len() {
        return w[tau.len() - 1];
    }
    let (a, b) = (tau[k - 1], tau[k]);
    let s = (t - a) / (b - a);
    w[k - 1] * (1.0 - s) + w[k] * s
}

/// Implied constants of the unit-time inequality on every row `tau` with
/// `tau + 1` inside the trace. Energies with `|W| <= zero_tol` count as
/// zero.
pub fn epiperimetric_check(
    trace: &WeissTrace,
    variant: EpiVariant,
    zero_tol: f64,
) -> Result<EpiReport> {
    let tau = trace.taus();
    let w = trace.weiss();
    let (Some(first), Some(last)) = (tau.first(), tau.last()) else {
        return Err(DiagError::TooShort("empty trace".into()));
    };
    if last - first < 1.0 - 1e-12 {
        return Err(DiagError::TooShort(format!(
            "trace covers [{first}, {last}], shorter than one unit"
        )));
    }
    let negative = matches!(variant, EpiVariant::NegativeGrowth);
    let mut flips = Vec::new();
    let mut prev_sign = 0i8;
    for (t, v) in tau.iter().zip(&w) {
        let s = if v.abs() <= zero_tol {
            0
        } else if *v > 0.0 {
            1
        } else {
            -1
        };
        if s != 0 {
            if prev_sign != 0 && s != prev_sign {
                flips.push(*t);
            }
            prev_sign = s;
        }
    }
    if !flips.is_empty() {
        return Err(DiagError::MixedSign(flips));
    }
    let wrong_sign = if negative {
        prev_sign > 0
    } else {
        prev_sign < 0
    };
    if wrong_sign {
        return Err(DiagError::InvalidArgument(format!(
            "energy sign does not match the {variant:?} regime"
        )));
    }

    let mut pairs = Vec::new();
    for (t, w0) in tau.iter().zip(&w) {
        if t + 1.0 > last + 1e-9 {
            break;
        }
        let w1 = value_at(&tau, &w, t + 1.0);
        let implied = if w0.abs() <= zero_tol {
            None
        } else {
            match variant {
                EpiVariant::Contraction => Some(1.0 - w1 / w0),
                EpiVariant::NegativeGrowth => Some(w1 / w0 - 1.0),
                EpiVariant::Logarithmic => {
                    let g = w1 * w1.ln().powi(2);
                    if w1 <= 0.0 || g <= 0.0 {
                        None
                    } else {
                        Some((1.0 - w1 / w0) / g)
                    }
                }
                EpiVariant::Forced { bound } => {
                    Some(1.0 - (w1 - 2.0 * (-0.5 * t).exp() * bound * bound) / w0)
                }
            }
        };
        pairs.push(EpiPair {
            tau: *t,
            w: *w0,
            w_next: w1,
            implied_c0: implied,
        });
    }
    let min_c0 = pairs
        .iter()
        .filter_map(|p| p.implied_c0)
        .fold(None, |a: Option<f64>, c| Some(a.map_or(c, |a| a.min(c))));
    let degenerate = min_c0.is_none();
    let window = (*first, *last);
    let fit = if degenerate {
        None
    } else {
        match variant {
            EpiVariant::NegativeGrowth => {
                let neg: Vec<f64> = w.iter().map(|v| -v).collect();
                fit_exponential(&tau, &neg, window).ok()
            }
            EpiVariant::Logarithmic => fit_decay(&tau, &w, DecayModel::Logarithmic, window).ok(),
            EpiVariant::Contraction => fit_decay(&tau, &w, DecayModel::Contraction, window).ok(),
            EpiVariant::Forced { .. } => {
                let e = trace.monotone_energy();
                fit_decay(&tau, &e, DecayModel::Contraction, window).ok()
            }
        }
    };
    Ok(EpiReport {
        variant,
        pairs,
        min_c0,
        degenerate,
        fit,
    })
}
