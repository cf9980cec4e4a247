use exact_solutions::{eval_profile32, Profile32};
use gaussian_calculus::{inner_mu, GaussianMeasure, HalfSpaceGrid, WeightedField};

use crate::energy::{boundary_integral, weiss_energy};
use crate::{DiagError, Result};

/// A one-parameter family of unit-amplitude 3/2-profiles `h_e`, indexed by
/// the angle of `e` in the boundary plane. For `n = 2` only the angles `0`
/// (`e_1`) and `pi` (`-e_1`) are meaningful.
pub trait ProfileFamily {
    fn grid(&self) -> &HalfSpaceGrid;
    /// The constant `c_n` of the profiles.
    fn normalization(&self) -> f64;
    fn profile(&self, angle: f64) -> Result<WeightedField>;
}

/// The closed-form profiles sampled at the grid nodes.
#[derive(Debug, Clone)]
pub struct SampledProfiles {
    grid: HalfSpaceGrid,
    c_n: f64,
}

impl SampledProfiles {
    pub fn new(grid: &HalfSpaceGrid, c_n: f64) -> Self {
        Self {
            grid: grid.clone(),
            c_n,
        }
    }

    /// Uses the stored reference constant for the grid's dimension.
    pub fn reference(grid: &HalfSpaceGrid) -> Result<Self> {
        let c = exact_solutions::goldens::profile_constant(grid.dim()).ok_or_else(|| {
            DiagError::InvalidArgument(format!("no profile constant for n = {}", grid.dim()))
        })?;
        Ok(Self::new(grid, c))
    }
}

impl ProfileFamily for SampledProfiles {
    fn grid(&self) -> &HalfSpaceGrid {
        &self.grid
    }

    fn normalization(&self) -> f64 {
        self.c_n
    }

    fn profile(&self, angle: f64) -> Result<WeightedField> {
        let e = Profile32::direction_from_angle(self.grid.dim(), angle);
        let p = Profile32::new(1.0, &e, self.c_n)?;
        Ok(eval_profile32(&p, &self.grid)?)
    }
}

/// `u = lambda h_e + v` with `lambda h_e` a closest point of the cone.
#[derive(Debug, Clone)]
pub struct Decomposition32 {
    pub lambda: f64,
    pub angle: f64,
    pub direction: Vec<f64>,
    /// Unit-amplitude profile `h_e`.
    pub profile: WeightedField,
    pub remainder: WeightedField,
    /// `lambda <h_e, v>`.
    pub orth1: f64,
    /// `lambda <d h_e / d angle, v>`; `None` for `n = 2`.
    pub orth22: Option<f64>,
}

struct Candidate {
    angle: f64,
    lambda: f64,
    score: f64,
    profile: WeightedField,
}

fn evaluate(
    u: &WeightedField,
    family: &dyn ProfileFamily,
    m: &GaussianMeasure,
    angle: f64,
) -> Result<Candidate> {
    let h = family.profile(angle)?;
    let corr = inner_mu(u, &h, m)?;
    let hh = inner_mu(&h, &h, m)?;
    let lambda = if hh > 0.0 { (corr / hh).max(0.0) } else { 0.0 };
    Ok(Candidate {
        angle,
        lambda,
        score: lambda * lambda * hh,
        profile: h,
    })
}

const COARSE_DIRECTIONS: usize = 256;
const ANGLE_TOL: f64 = 1e-6;

/// Project onto the cone `{lambda h_e : lambda >= 0, |e| = 1}`.
///
/// The objective `<u, h_e>_+^2 / |h_e|^2` is scanned on 256 directions
/// (n = 3) or the two directions `+-e_1` (n = 2), refined by golden-section
/// search to `1e-6` in angle, then by one parabolic step if that improves
/// it. Ties go to the smaller angle.
pub fn project_e32(
    u: &WeightedField,
    family: &dyn ProfileFamily,
    m: &GaussianMeasure,
) -> Result<Decomposition32> {
    let n = u.grid().dim();
    let best = if n == 2 {
        let a = evaluate(u, family, m, 0.0)?;
        let b = evaluate(u, family, m, std::f64::consts::PI)?;
        if b.score > a.score {
            b
        } else {
            a
        }
    } else {
        let step = std::f64::consts::TAU / COARSE_DIRECTIONS as f64;
        let mut best: Option<Candidate> = None;
        for k in 0..COARSE_DIRECTIONS {
            let c = evaluate(u, family, m, k as f64 * step)?;
            if best.as_ref().is_none_or(|b| c.score > b.score) {
                best = Some(c);
            }
        }
        let coarse = best.expect("at least one direction");
        if coarse.score == 0.0 {
            coarse
        } else {
            refine(u, family, m, coarse, step)?
        }
    };
    let remainder = u.add_scaled(-best.lambda, &best.profile)?;
    let orth1 = best.lambda * inner_mu(&best.profile, &remainder, m)?;
    let orth22 = if n == 3 {
        Some(best.lambda * angular_derivative_overlap(&remainder, best.angle, family, m)?)
    } else {
        None
    };
    Ok(Decomposition32 {
        lambda: best.lambda,
        angle: best.angle,
        direction: Profile32::direction_from_angle(n, best.angle),
        profile: best.profile,
        remainder,
        orth1,
        orth22,
    })
}

fn refine(
    u: &WeightedField,
    family: &dyn ProfileFamily,
    m: &GaussianMeasure,
    coarse: Candidate,
    step: f64,
) -> Result<Candidate> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (coarse.angle - step, coarse.angle + step);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = evaluate(u, family, m, x1)?;
    let mut f2 = evaluate(u, family, m, x2)?;
    while b - a > ANGLE_TOL {
        if f1.score >= f2.score {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = evaluate(u, family, m, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = evaluate(u, family, m, x2)?;
        }
    }
    let mut best = if f1.score >= f2.score { f1 } else { f2 };
    if coarse.score > best.score {
        best = coarse;
    }
    // One parabolic step through three nearby samples.
    let d = 1e-3;
    let (l, r) = (
        evaluate(u, family, m, best.angle - d)?,
        evaluate(u, family, m, best.angle + d)?,
    );
    let denom = l.score - 2.0 * best.score + r.score;
    if denom < 0.0 {
        let shift = 0.5 * d * (l.score - r.score) / denom;
        if shift.abs() < d {
            let p = evaluate(u, family, m, best.angle + shift)?;
            if p.score > best.score {
                best = p;
            }
        }
    }
    best.angle = best.angle.rem_euclid(std::f64::consts::TAU);
    Ok(best)
}

/// `<d h_{e(angle)} / d angle, v>` with
/// `d h / d angle = 3/2 c_n Re(y'.e + i|y_n|)^{1/2} (y'.e~)`, `e~` the
/// rotation of `e` by a right angle in the boundary plane.
fn angular_derivative_overlap(
    v: &WeightedField,
    angle: f64,
    family: &dyn ProfileFamily,
    m: &GaussianMeasure,
) -> Result<f64> {
    let (c, s) = (angle.cos(), angle.sin());
    let cn = family.normalization();
    let g = v.grid();
    let d = WeightedField::from_fn(g, |y| {
        let a = c * y[0] + s * y[1];
        let b = y[2].abs();
        let r = a.hypot(b);
        let root = if r == 0.0 {
            0.0
        } else {
            r.sqrt() * (0.5 * b.atan2(a)).cos()
        };
        1.5 * cn * root * (-s * y[0] + c * y[1])
    });
    Ok(inner_mu(&d, v, m)?)
}

/// `d_n h_e` on the boundary nodes for the unit-amplitude profile:
/// `-(3/2) c_n (-(y'.e))_+^{1/2}`.
pub fn normal_derivative_profile(grid: &HalfSpaceGrid, direction: &[f64], c_n: f64) -> Vec<f64> {
    let n = grid.dim();
    (0..grid.boundary_len())
        .map(|b| {
            let y = grid.coord(grid.boundary_node(b));
            let a: f64 = direction.iter().zip(&y[..n - 1]).map(|(e, v)| e * v).sum();
            if a < 0.0 {
                -1.5 * c_n * (-a).sqrt()
            } else {
                0.0
            }
        })
        .collect()
}

/// Both sides of `W(u) = W(v) - lambda/2 int_{y_n=0} u d_n h_e dmu'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split32 {
    pub w_u: f64,
    pub w_v: f64,
    pub boundary_term: f64,
    /// `W(u) - (W(v) + boundary_term)`.
    pub residual: f64,
    /// Whether the trace of `u` is nonnegative at every boundary node.
    pub trace_nonnegative: bool,
}

pub fn weiss_split_32(
    u: &WeightedField,
    dec: &Decomposition32,
    c_n: f64,
    m: &GaussianMeasure,
) -> Result<Split32> {
    let w_u = weiss_energy(u, 1.5, m)?;
    let w_v = weiss_energy(&dec.remainder, 1.5, m)?;
    let dn = normal_derivative_profile(u.grid(), &dec.direction, c_n);
    let trace = u.boundary_trace();
    let boundary_term = -0.5 * dec.lambda * boundary_integral(&trace, &dn, m);
    Ok(Split32 {
        w_u,
        w_v,
        boundary_term,
        residual: w_u - (w_v + boundary_term),
        trace_nonnegative: trace.iter().all(|v| *v >= 0.0),
    })
}
