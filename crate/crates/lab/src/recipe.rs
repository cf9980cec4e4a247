//! Initial data. Every function takes the run's generator by reference and
//! draws from it in a fixed order, so one seed determines all data of a run.

use exact_solutions::{eval_h2m, eval_hermite, hermite_basis};
use gaussian_calculus::{inner_mu, l2mu_norm, GaussianMeasure, HalfSpaceGrid, WeightedField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use signorini_solver::BalancedProfile;
use weiss_diagnostics::weiss_energy;

use crate::Result;

pub type LabRng = ChaCha8Rng;

pub fn rng(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut LabRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Sets negative boundary values to zero; returns the number of nodes
/// changed.
pub fn clip_trace(u: &mut WeightedField) -> usize {
    let g = u.grid().clone();
    let mut clipped = 0;
    for (i, v) in u.values_mut().iter_mut().enumerate() {
        if g.is_boundary_layer(i) && *v < 0.0 {
            *v = 0.0;
            clipped += 1;
        }
    }
    clipped
}

/// `sum c_alpha p_alpha(y) e^{-|y|^2/2}` over `|alpha| <= 3` with standard
/// normal coefficients. Not shifted; may have a negative trace.
pub fn windowed_hermite(grid: &HalfSpaceGrid, rng: &mut LabRng) -> Result<WeightedField> {
    let mut q = WeightedField::zeros(grid);
    for alpha in hermite_basis(grid.dim(), 0..=3) {
        let c = normal(rng);
        let p = eval_hermite(&alpha, grid)?;
        let window = WeightedField::from_fn(grid, |y| {
            (-0.5 * y.iter().map(|v| v * v).sum::<f64>()).exp()
        });
        let local: Vec<f64> = p
            .values()
            .iter()
            .zip(window.values())
            .map(|(a, b)| a * b)
            .collect();
        q = q.add_scaled(c, &WeightedField::new(grid.clone(), local, 0.0)?)?;
    }
    Ok(q)
}

/// Windowed Hermite data minus the median of the trace over `|y'| <= 2`,
/// trace clipped. About half of the central boundary starts in contact,
/// so the constraint is active from the first step.
pub fn random_admissible(grid: &HalfSpaceGrid, rng: &mut LabRng) -> Result<WeightedField> {
    let q = windowed_hermite(grid, rng)?;
    let trace = q.boundary_trace();
    let mut central: Vec<f64> = (0..grid.boundary_len())
        .filter(|&b| {
            let y = grid.boundary_coord(b);
            y[..grid.dim() - 1].iter().map(|v| v * v).sum::<f64>() <= 4.0
        })
        .map(|b| trace[b])
        .collect();
    central.sort_by(f64::total_cmp);
    let median = central.get(central.len() / 2).copied().unwrap_or(0.0);
    let mut u = q.add_scaled(-median, &WeightedField::from_fn(grid, |_| 1.0))?;
    clip_trace(&mut u);
    Ok(u)
}

/// Windowed Hermite data lifted by a constant so that the trace minimum is
/// zero. Smooth and admissible, with contact starting at isolated points.
pub fn smooth_admissible(grid: &HalfSpaceGrid, rng: &mut LabRng) -> Result<WeightedField> {
    let q = windowed_hermite(grid, rng)?;
    let low = q.boundary_trace().into_iter().fold(f64::INFINITY, f64::min);
    Ok(q.add_scaled(-low, &WeightedField::from_fn(grid, |_| 1.0))?)
}

/// A perturbation of the balanced profile in its first `modes` stable
/// modes with `|u - h| = rel |h|`, shrunk where needed so the trace stays
/// nonnegative without clipping. The modes vanish on the contact set, so
/// only nodes near the free boundary can limit the size. Clipping there
/// would move the free boundary and excite the growing translation mode.
pub fn perturb_balanced(
    bp: &BalancedProfile,
    rng: &mut LabRng,
    rel: f64,
    modes: usize,
) -> Result<WeightedField> {
    let grid = bp.field.grid();
    let m = GaussianMeasure::conformal(grid);
    let mut p = WeightedField::zeros(grid);
    for (_, mode) in bp.stable_modes().take(modes) {
        p = p.add_scaled(normal(rng), mode)?;
    }
    let size = l2mu_norm(&p, &m)?;
    if size == 0.0 {
        return Ok(bp.field.clone());
    }
    let mut scale = rel * l2mu_norm(&bp.field, &m)? / size;
    let (h, d) = (bp.field.boundary_trace(), p.boundary_trace());
    for (hb, db) in h.iter().zip(&d) {
        if *db < 0.0 && hb + scale * db < 0.0 {
            scale = hb.max(0.0) / -db;
        }
    }
    Ok(bp.field.add_scaled(scale, &p)?)
}

/// Affine data `a + b y_1` plus a Gaussian bump, redrawn until
/// `W_kappa < 0`. The constant keeps the trace positive on the whole
/// truncated boundary.
pub fn negative_energy(grid: &HalfSpaceGrid, rng: &mut LabRng, kappa: f64) -> Result<WeightedField> {
    let m = GaussianMeasure::conformal(grid);
    let r = grid.radius();
    loop {
        let b = 0.5 * normal(rng);
        let a = b.abs() * r + rng.random_range(0.2..1.0);
        let c = 0.5 * normal(rng);
        let x0 = rng.random_range(-1.0..1.0);
        let u = WeightedField::from_fn(grid, |y| {
            let d2 = (y[0] - x0).powi(2) + y[1..].iter().map(|v| v * v).sum::<f64>();
            a + b * y[0] + c * (-d2).exp()
        });
        let mut u = u;
        clip_trace(&mut u);
        if weiss_energy(&u, kappa, &m)? < 0.0 {
            return Ok(u);
        }
    }
}

/// Unit-norm `h_{2m}`.
pub fn unit_h2m(grid: &HalfSpaceGrid, m: usize) -> Result<WeightedField> {
    let meas = GaussianMeasure::conformal(grid);
    let (h, _) = eval_h2m(m, grid)?;
    let norm = l2mu_norm(&h, &meas)?;
    Ok(h.scaled(1.0 / norm))
}

/// `h_{2m} + rel * q` with `q` a unit-norm random combination of the
/// degree `2m + 2` basis, trace clipped. The added modes carry positive
/// `W_{2m}`.
pub fn e2m_above(grid: &HalfSpaceGrid, rng: &mut LabRng, m: usize, rel: f64) -> Result<WeightedField> {
    let meas = GaussianMeasure::conformal(grid);
    let base = unit_h2m(grid, m)?;
    let mut q = WeightedField::zeros(grid);
    for alpha in hermite_basis(grid.dim(), 2 * m + 2..=2 * m + 2) {
        q = q.add_scaled(normal(rng), &eval_hermite(&alpha, grid)?)?;
    }
    let q = q.scaled(1.0 / l2mu_norm(&q, &meas)?);
    let mut u = base.add_scaled(rel, &q)?;
    clip_trace(&mut u);
    Ok(u)
}

/// An element of `E_2^+` whose trace touches zero, `a h_2 + b (y_1^2 - y_n^2)`
/// normalized, plus `rel` times unit windowed Hermite noise, trace clipped.
/// The noise creates a contact region, so the boundary fluxes are active.
pub fn e2_with_contact(grid: &HalfSpaceGrid, rng: &mut LabRng, rel: f64) -> Result<WeightedField> {
    let meas = GaussianMeasure::conformal(grid);
    let n = grid.dim();
    let a: f64 = rng.random_range(0.0..0.5);
    let saddle = WeightedField::from_fn(grid, |y| y[0] * y[0] - y[n - 1] * y[n - 1]);
    let saddle = saddle.scaled(1.0 / l2mu_norm(&saddle, &meas)?);
    let base = unit_h2m(grid, 1)?.scaled(a).add_scaled(1.0 - a, &saddle)?;
    let base = base.scaled(1.0 / l2mu_norm(&base, &meas)?);
    let noise = windowed_hermite(grid, rng)?;
    let noise = noise.scaled(1.0 / l2mu_norm(&noise, &meas)?);
    let mut u = base.add_scaled(rel, &noise)?;
    clip_trace(&mut u);
    Ok(u)
}

/// Unit-norm random element of `span{p_alpha : |alpha| < 2m}`.
pub fn below_2m(grid: &HalfSpaceGrid, rng: &mut LabRng, m: usize) -> Result<WeightedField> {
    let meas = GaussianMeasure::conformal(grid);
    let mut q = WeightedField::zeros(grid);
    for alpha in hermite_basis(grid.dim(), 0..=2 * m - 1) {
        q = q.add_scaled(normal(rng), &eval_hermite(&alpha, grid)?)?;
    }
    let norm = inner_mu(&q, &q, &meas)?.sqrt();
    Ok(q.scaled(1.0 / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaussian_calculus::make_grid;

    #[test]
    fn same_seed_same_data() {
        let g = make_grid(2, 4.0, 0.25).unwrap();
        let a = random_admissible(&g, &mut rng(9)).unwrap();
        let b = random_admissible(&g, &mut rng(9)).unwrap();
        let c = random_admissible(&g, &mut rng(10)).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert!(a.boundary_trace().iter().all(|v| *v >= 0.0));
        let s = smooth_admissible(&g, &mut rng(9)).unwrap();
        let low = s.boundary_trace().into_iter().fold(f64::INFINITY, f64::min);
        assert!(low.abs() < 1e-12);
    }

    #[test]
    fn negative_energy_data() {
        let g = make_grid(2, 4.0, 0.25).unwrap();
        let m = GaussianMeasure::conformal(&g);
        let mut r = rng(1);
        for kappa in [1.5, 2.0] {
            let u = negative_energy(&g, &mut r, kappa).unwrap();
            assert!(weiss_energy(&u, kappa, &m).unwrap() < 0.0);
            assert!(u.boundary_trace().iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn low_modes_are_unit() {
        let g = make_grid(2, 5.0, 0.2).unwrap();
        let m = GaussianMeasure::conformal(&g);
        let q = below_2m(&g, &mut rng(2), 2).unwrap();
        assert!((l2mu_norm(&q, &m).unwrap() - 1.0).abs() < 1e-12);
        let u = e2_with_contact(&g, &mut rng(3), 0.05).unwrap();
        assert!(u.boundary_trace().iter().all(|v| *v >= 0.0));
    }
}
