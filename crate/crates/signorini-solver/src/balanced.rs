use banded_linalg::{lowest_eigenpairs, EigenOptions, SymBanded};
use exact_solutions::{eval_profile32, Profile32};
use gaussian_calculus::{inner_mu, GaussianMeasure, HalfSpaceGrid, WeightedField};

use crate::operator::{apply_weiss_operator, for_each_edge};
use weiss_diagnostics::{DiagError, ProfileFamily};

use crate::{Result, SolverError};

const NONE: usize = usize::MAX;

/// Discrete counterpart of a 3/2-profile.
///
/// The sampled `h_e` is not an exact fixed point of the discrete flow, and
/// its defect excites the translation mode `Re(y'.e + i|y_n|)^{1/2}`,
/// which grows like `e^{tau/2}` at `kappa = 3/2`. Solving the mixed
/// eigenproblem `K x = mu M x` with `x = 0` on `{y_n = 0, y'.e <= 0}` gives
/// a field `h_h` with `mu ~ 3/4` that the scheme keeps exactly stationary at
/// `kappa_h = 2 mu`, provided the contact force on the contact half-plane
/// is nonnegative. The remaining eigenpairs are the discrete modes of the
/// linearization around it.
#[derive(Debug, Clone)]
pub struct BalancedProfile {
    /// `h_h`, scaled to the norm of the sampled `h_e` and positively
    /// correlated with it.
    pub field: WeightedField,
    pub kappa: f64,
    /// All computed `mu_k`, ascending.
    pub eigenvalues: Vec<f64>,
    /// `M`-orthonormal eigenvectors, aligned with `eigenvalues`.
    pub modes: Vec<WeightedField>,
    /// Position of `h_h` among the modes.
    pub profile_index: usize,
    /// `min (K h_h)_i` over the contact half-plane, which must be `>= 0`.
    pub min_contact_force: f64,
    /// `<h_h, h_e> / (|h_h| |h_e|)`.
    pub correlation: f64,
}

impl BalancedProfile {
    /// Modes above the profile, which decay under the linearized flow at
    /// `kappa_h` with rates `mu_k - kappa_h/2`.
    pub fn stable_modes(&self) -> impl Iterator<Item = (f64, &WeightedField)> {
        self.eigenvalues
            .iter()
            .zip(&self.modes)
            .skip(self.profile_index + 1)
            .map(|(mu, f)| (*mu, f))
    }
}

pub fn balanced_profile(
    grid: &HalfSpaceGrid,
    direction: &[f64],
    c_n: f64,
    count: usize,
) -> Result<BalancedProfile> {
    let n = grid.dim();
    let m = GaussianMeasure::conformal(grid);
    let contact = |idx: usize| {
        if !grid.is_boundary_layer(idx) {
            return false;
        }
        let y = grid.coord(idx);
        let a: f64 = direction.iter().zip(&y[..n - 1]).map(|(e, v)| e * v).sum();
        a <= 0.0
    };
    let mut pos = vec![NONE; grid.len()];
    let mut free = Vec::new();
    for idx in 0..grid.len() {
        if !grid.is_truncation(idx) && !contact(idx) {
            pos[idx] = free.len();
            free.push(idx);
        }
    }
    let mut bw = 0;
    let mut diag = vec![0.0; grid.len()];
    for_each_edge(grid, &m, |i, j, w| {
        diag[i] += w;
        diag[j] += w;
        if pos[i] != NONE && pos[j] != NONE {
            bw = bw.max(pos[j] - pos[i]);
        }
    });
    let mut k = SymBanded::zeros(free.len(), bw);
    for (p, &idx) in free.iter().enumerate() {
        k.add(p, p, diag[idx])?;
    }
    let mut failure = None;
    for_each_edge(grid, &m, |i, j, w| {
        if pos[i] != NONE && pos[j] != NONE {
            if let Err(e) = k.add(pos[i], pos[j], -w) {
                failure = Some(e);
            }
        }
    });
    if let Some(e) = failure {
        return Err(e.into());
    }
    let mass: Vec<f64> = free.iter().map(|&i| m.weights()[i]).collect();
    let pairs = lowest_eigenpairs(&k, &mass, count, EigenOptions::default())?;

    let modes: Vec<WeightedField> = pairs
        .vectors
        .iter()
        .map(|v| {
            let mut full = vec![0.0; grid.len()];
            for (&idx, x) in free.iter().zip(v) {
                full[idx] = *x;
            }
            WeightedField::new(grid.clone(), full, 0.0)
        })
        .collect::<std::result::Result<_, _>>()?;

    let sampled = eval_profile32(&Profile32::new(1.0, direction, c_n)?, grid)?;
    let he_norm = inner_mu(&sampled, &sampled, &m)?.sqrt();
    let mut best = (0, 0.0f64);
    for (i, f) in modes.iter().enumerate() {
        let c = inner_mu(f, &sampled, &m)? / he_norm;
        if c.abs() > best.1.abs() {
            best = (i, c);
        }
    }
    let (index, corr) = best;
    let field = modes[index].scaled(he_norm * corr.signum());
    let kappa = 2.0 * pairs.values[index];
    let force = apply_weiss_operator(grid, &m, kappa, field.values());
    let min_contact_force = (0..grid.len())
        .filter(|&i| contact(i) && !grid.is_truncation(i))
        .map(|i| force[i])
        .fold(f64::INFINITY, f64::min);
    Ok(BalancedProfile {
        field,
        kappa,
        eigenvalues: pairs.values,
        modes,
        profile_index: index,
        min_contact_force,
        correlation: corr.abs(),
    })
}

/// The balanced profiles as a projection family in two dimensions, where
/// the cone has the two directions `+-e_1` and the second is the mirror
/// image of the first.
#[derive(Debug, Clone)]
pub struct BalancedFamily {
    c_n: f64,
    plus: WeightedField,
    minus: WeightedField,
}

impl BalancedFamily {
    /// `profile` must come from `balanced_profile` with direction `e_1` on
    /// a two-dimensional grid.
    pub fn new(profile: &BalancedProfile, c_n: f64) -> Result<Self> {
        let grid = profile.field.grid();
        if grid.dim() != 2 {
            return Err(SolverError::InvalidConfig(
                "balanced projection family needs n = 2".into(),
            ));
        }
        let count = grid.counts()[0];
        let mut mirrored = vec![0.0; grid.len()];
        for (idx, v) in profile.field.values().iter().enumerate() {
            let mut multi = grid.multi_index(idx);
            multi[0] = count - 1 - multi[0];
            mirrored[grid.index(&multi[..2])] = *v;
        }
        Ok(Self {
            c_n,
            plus: profile.field.clone(),
            minus: WeightedField::new(grid.clone(), mirrored, 0.0)?,
        })
    }
}

impl ProfileFamily for BalancedFamily {
    fn grid(&self) -> &HalfSpaceGrid {
        self.plus.grid()
    }

    fn normalization(&self) -> f64 {
        self.c_n
    }

    fn profile(&self, angle: f64) -> weiss_diagnostics::Result<WeightedField> {
        let c = angle.cos();
        if (c - 1.0).abs() < 1e-12 {
            Ok(self.plus.clone())
        } else if (c + 1.0).abs() < 1e-12 {
            Ok(self.minus.clone())
        } else {
            Err(DiagError::InvalidArgument(format!(
                "balanced family has no profile at angle {angle}"
            )))
        }
    }
}
