use gaussian_calculus::{dirichlet_form, inner_mu, GaussianMeasure, WeightedField};

use crate::{DiagError, Result};

/// `W_kappa(u) = int 1/4 |grad u|^2 - kappa/2 u^2 dmu`.
///
/// The gradient term is the edge-difference Dirichlet form, which is the
/// quadratic form whose gradient defines the solver's operator. With it the
/// energy identities of the flow hold exactly for the discrete trajectories.
pub fn weiss_energy(u: &WeightedField, kappa: f64, m: &GaussianMeasure) -> Result<f64> {
    let d = dirichlet_form(u, u, m)?;
    let l2 = inner_mu(u, u, m)?;
    Ok(0.25 * d - 0.5 * kappa * l2)
}

/// `W + 4 e^{-tau/2} M^2`, the energy that stays monotone under forcing
/// with `sup_tau |f~(tau)| <= M`.
pub fn modified_energy(w: f64, tau: f64, forcing_bound: f64) -> f64 {
    w + 4.0 * (-0.5 * tau).exp() * forcing_bound * forcing_bound
}

/// `int_{y_n = 0} a b dmu'` with the boundary weights of `m`.
pub fn boundary_integral(a: &[f64], b: &[f64], m: &GaussianMeasure) -> f64 {
    m.boundary_weights()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(w, (x, y))| w * x * y)
        .sum()
}

/// Weiss energy from a slice `u(., t)` in original coordinates:
/// `(-t)^{1-kappa} int |grad u|^2 G - kappa/2 (-t)^{-kappa} int u^2 G`
/// over the half-space, times `pi^{n/2}`.
///
/// The factor `pi^{n/2}` undoes the normalization of the heat kernel, so the
/// value equals `W_kappa` of the self-similar field. The slice's grid is in
/// `x` and `slice.time()` is `t`.
pub fn weiss_original(slice: &WeightedField, kappa: f64) -> Result<f64> {
    let t = slice.time();
    if !(t < 0.0) {
        return Err(DiagError::NonNegativeTime(t));
    }
    let g = slice.grid();
    let n = g.dim();
    let h = g.spacing();
    let cell = h.powi(n as i32);
    let kernel = |x: &[f64]| exact_solutions::eval_kernel(x, t);
    let trap = |multi: &[usize; 3], skip: Option<usize>| -> f64 {
        let mut f = 1.0;
        for a in 0..n {
            if Some(a) == skip {
                continue;
            }
            if multi[a] == 0 || multi[a] + 1 == g.counts()[a] {
                f *= 0.5;
            }
        }
        f
    };
    let v = slice.values();
    let mut mass = 0.0;
    let mut grad = 0.0;
    for i in 0..g.len() {
        let multi = g.multi_index(i);
        let x = g.coord(i);
        mass += cell * trap(&multi, None) * kernel(&x[..n]) * v[i] * v[i];
        for axis in 0..n {
            if multi[axis] + 1 == g.counts()[axis] {
                continue;
            }
            let mut mid = x;
            mid[axis] += 0.5 * h;
            let j = i + g.strides()[axis];
            let d = (v[j] - v[i]) / h;
            grad += cell * trap(&multi, Some(axis)) * kernel(&mid[..n]) * d * d;
        }
    }
    let s = -t;
    let pi_factor = std::f64::consts::PI.powf(0.5 * n as f64);
    Ok(pi_factor * (s.powf(1.0 - kappa) * grad - 0.5 * kappa * s.powf(-kappa) * mass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaussian_calculus::make_grid;

    #[test]
    fn constant_field_has_negative_energy() {
        let g = make_grid(2, 6.0, 0.05).unwrap();
        let m = GaussianMeasure::conformal(&g);
        let one = WeightedField::from_fn(&g, |_| 1.0);
        let w = weiss_energy(&one, 2.0, &m).unwrap();
        assert!((w + std::f64::consts::FRAC_PI_2).abs() < 1e-3);
    }

    #[test]
    fn modified_energy_adds_forcing_term() {
        assert_eq!(modified_energy(1.0, 0.0, 0.5), 2.0);
        assert!((modified_energy(0.0, 2.0, 1.0) - 4.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn original_energy_rejects_nonnegative_time() {
        let g = make_grid(2, 1.0, 0.5).unwrap();
        let f = WeightedField::zeros(&g).with_time(0.0);
        assert!(matches!(
            weiss_original(&f, 1.5),
            Err(DiagError::NonNegativeTime(_))
        ));
    }
}
