//! Self-similar coordinates `y = x / (2 sqrt(-t))`, `tau = -ln(-t)` and the
//! `kappa`-normalized field `u~(y, tau) = u(x, t) / (sqrt(-t))^kappa`.
//!
//! Solutions in original coordinates are accessed through the
//! [`OriginalSolution`] trait, which only needs pointwise evaluation on time
//! slices; no space-time array is ever stored.

use exact_solutions::homogeneous_extend;
use gaussian_calculus::{CalcError, HalfSpaceGrid, WeightedField};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConformalError {
    #[error("time must be negative, got t = {0}")]
    NonNegativeTime(f64),
    #[error("no source data at x = {x:?}, t = {t}")]
    OutsideSource { x: Vec<f64>, t: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("energy series do not overlap after the shift")]
    InsufficientCoverage,
    #[error(transparent)]
    Calc(#[from] CalcError),
}

pub type Result<T> = std::result::Result<T, ConformalError>;

pub fn tau_of(t: f64) -> f64 {
    -(-t).ln()
}

pub fn time_of(tau: f64) -> f64 {
    -(-tau).exp()
}

/// The time shift `-2 ln lambda` that a parabolic rescaling by `lambda`
/// induces in self-similar time.
pub fn conformal_shift(lambda: f64) -> f64 {
    -2.0 * lambda.ln()
}

/// Homogeneity and self-similar time discretization of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalFrame {
    kappa: f64,
    tau_max: f64,
    dtau: f64,
}

impl ConformalFrame {
    pub fn new(kappa: f64, tau_max: f64, dtau: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(ConformalError::InvalidParameter(format!("kappa = {kappa}")));
        }
        if !(dtau > 0.0 && tau_max >= 0.0 && tau_max.is_finite()) {
            return Err(ConformalError::InvalidParameter(format!(
                "tau range [0, {tau_max}] with step {dtau}"
            )));
        }
        Ok(Self {
            kappa,
            tau_max,
            dtau,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    /// Number of steps needed to reach `tau_max`.
    pub fn steps(&self) -> usize {
        (self.tau_max / self.dtau - 1e-9).ceil().max(0.0) as usize
    }

    /// Whether `kappa` is `3/2` or an even integer, the values experiments use.
    pub fn is_experimental(&self) -> bool {
        (self.kappa - 1.5).abs() < 1e-12
            || (self.kappa >= 2.0 && (self.kappa / 2.0 - (self.kappa / 2.0).round()).abs() < 1e-12)
    }
}

/// A solution in original coordinates `(x, t)`, `t < 0`.
pub trait OriginalSolution {
    fn dim(&self) -> usize;
    /// `None` where the solution is not available (outside its data).
    fn eval(&self, x: &[f64], t: f64) -> Option<f64>;
}

impl<T: OriginalSolution + ?Sized> OriginalSolution for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64], t: f64) -> Option<f64> {
        (**self).eval(x, t)
    }
}

/// Closed-form solution.
pub struct FnSolution<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[f64], f64) -> f64> FnSolution<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[f64], f64) -> f64> OriginalSolution for FnSolution<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[f64], t: f64) -> Option<f64> {
        (t < 0.0).then(|| (self.f)(x, t))
    }
}

/// `kappa`-homogeneous extension of a stationary self-similar field.
pub struct HomogeneousExtension {
    pub field: WeightedField,
    pub kappa: f64,
}

impl OriginalSolution for HomogeneousExtension {
    fn dim(&self) -> usize {
        self.field.grid().dim()
    }
    fn eval(&self, x: &[f64], t: f64) -> Option<f64> {
        homogeneous_extend(&self.field, self.kappa, x, t).ok()
    }
}

/// A field in original coordinates known on the single slice `t = field.time()`.
pub struct OriginalSlice {
    pub field: WeightedField,
}

impl OriginalSolution for OriginalSlice {
    fn dim(&self) -> usize {
        self.field.grid().dim()
    }
    fn eval(&self, x: &[f64], t: f64) -> Option<f64> {
        let t0 = self.field.time();
        if (t - t0).abs() > 1e-12 * t0.abs().max(1.0) {
            return None;
        }
        self.field.interpolate(x)
    }
}

/// A self-similar trajectory read back in original coordinates; between
/// stored slices the field is interpolated linearly in `tau`.
pub struct ConformalTrajectory {
    kappa: f64,
    snapshots: Vec<WeightedField>,
}

impl ConformalTrajectory {
    /// `snapshots` must carry increasing `tau` stamps on a common grid.
    pub fn new(kappa: f64, snapshots: Vec<WeightedField>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(ConformalError::InvalidParameter("empty trajectory".into()));
        }
        if snapshots.windows(2).any(|w| !(w[1].time() > w[0].time()))
            || snapshots.iter().any(|s| !s.grid().same_as(snapshots[0].grid()))
        {
            return Err(ConformalError::InvalidParameter(
                "snapshots must share a grid and have increasing tau".into(),
            ));
        }
        Ok(Self { kappa, snapshots })
    }

    pub fn snapshots(&self) -> &[WeightedField] {
        &self.snapshots
    }

    /// `u~(y, tau)` with linear interpolation in `tau`.
    pub fn selfsimilar_value(&self, y: &[f64], tau: f64) -> Option<f64> {
        let s = &self.snapshots;
        let eps = 1e-12;
        if tau < s[0].time() - eps || tau > s[s.len() - 1].time() + eps {
            return None;
        }
        let k = s.partition_point(|f| f.time() <= tau).clamp(1, s.len().max(2) - 1);
        if s.len() == 1 {
            return s[0].interpolate(y);
        }
        let (a, b) = (&s[k - 1], &s[k]);
        let w = ((tau - a.time()) / (b.time() - a.time())).clamp(0.0, 1.0);
        Some((1.0 - w) * a.interpolate(y)? + w * b.interpolate(y)?)
    }
}

impl OriginalSolution for ConformalTrajectory {
    fn dim(&self) -> usize {
        self.snapshots[0].grid().dim()
    }
    fn eval(&self, x: &[f64], t: f64) -> Option<f64> {
        if !(t < 0.0) {
            return None;
        }
        let s = (-t).sqrt();
        let y: Vec<f64> = x.iter().map(|v| v / (2.0 * s)).collect();
        Some(s.powf(self.kappa) * self.selfsimilar_value(&y, tau_of(t))?)
    }
}

/// `u_lambda(x, t) = u(lambda x, lambda^2 t) / lambda^kappa`.
pub struct Rescaled<U> {
    inner: U,
    lambda: f64,
    kappa: f64,
}

impl<U: OriginalSolution> OriginalSolution for Rescaled<U> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[f64], t: f64) -> Option<f64> {
        let xs: Vec<f64> = x.iter().map(|v| self.lambda * v).collect();
        Some(self.inner.eval(&xs, self.lambda * self.lambda * t)? / self.lambda.powf(self.kappa))
    }
}

/// Parabolic `kappa`-rescaling. Experiments use `lambda` in `(0, 1]`.
pub fn rescale<U: OriginalSolution>(u: U, lambda: f64, kappa: f64) -> Result<Rescaled<U>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ConformalError::InvalidParameter(format!("lambda = {lambda}")));
    }
    Ok(Rescaled {
        inner: u,
        lambda,
        kappa,
    })
}

/// Sample `u~_kappa(., tau)` with `tau = -ln(-t)` on `grid`.
pub fn to_selfsimilar<U: OriginalSolution + ?Sized>(
    u: &U,
    kappa: f64,
    t: f64,
    grid: &HalfSpaceGrid,
) -> Result<WeightedField> {
    if !(t < 0.0) {
        return Err(ConformalError::NonNegativeTime(t));
    }
    let n = grid.dim();
    let s = (-t).sqrt();
    let scale = s.powf(-kappa);
    let mut values = Vec::with_capacity(grid.len());
    let mut x = vec![0.0; n];
    for i in 0..grid.len() {
        let y = grid.coord(i);
        for a in 0..n {
            x[a] = 2.0 * s * y[a];
        }
        let v = u.eval(&x, t).ok_or_else(|| ConformalError::OutsideSource {
            x: x.clone(),
            t,
        })?;
        values.push(scale * v);
    }
    Ok(WeightedField::new(grid.clone(), values, tau_of(t))?)
}

/// Sample `u(., t)` with `t = -e^{-tau}` from a self-similar snapshot on an
/// original-coordinates grid. The result carries time stamp `t`.
pub fn from_selfsimilar(
    field: &WeightedField,
    kappa: f64,
    grid_x: &HalfSpaceGrid,
) -> Result<WeightedField> {
    let t = time_of(field.time());
    let s = (-t).sqrt();
    let n = grid_x.dim();
    let mut values = Vec::with_capacity(grid_x.len());
    let mut y = vec![0.0; n];
    for i in 0..grid_x.len() {
        let x = grid_x.coord(i);
        for a in 0..n {
            y[a] = x[a] / (2.0 * s);
        }
        let v = field
            .interpolate(&y)
            .ok_or_else(|| ConformalError::OutsideSource {
                x: x[..n].to_vec(),
                t,
            })?;
        values.push(s.powf(kappa) * v);
    }
    Ok(WeightedField::new(grid_x.clone(), values, t)?)
}

/// A scalar sampled on a self-similar time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    pub tau: Vec<f64>,
    pub value: Vec<f64>,
}

impl EnergySeries {
    pub fn new(tau: Vec<f64>, value: Vec<f64>) -> Result<Self> {
        if tau.len() != value.len() || tau.is_empty() || tau.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ConformalError::InvalidParameter(
                "series needs matching, nonempty, increasing samples".into(),
            ));
        }
        Ok(Self { tau, value })
    }

    /// Linear interpolation; `None` outside the sampled range.
    pub fn at(&self, tau: f64) -> Option<f64> {
        let eps = 1e-9 * (1.0 + tau.abs());
        let (first, last) = (self.tau[0], self.tau[self.tau.len() - 1]);
        if tau < first - eps || tau > last + eps {
            return None;
        }
        if self.tau.len() == 1 {
            return Some(self.value[0]);
        }
        let k = self.tau.partition_point(|s| *s <= tau).clamp(1, self.tau.len() - 1);
        let (t0, t1) = (self.tau[k - 1], self.tau[k]);
        let w = ((tau - t0) / (t1 - t0)).clamp(0.0, 1.0);
        Some((1.0 - w) * self.value[k - 1] + w * self.value[k])
    }
}

/// `max_tau |W(u~(tau - 2 ln lambda)) - W(u~_lambda(tau))|` over the samples
/// of `rescaled` whose shifted time is covered by `original`.
pub fn weiss_shift_identity_check(
    original: &EnergySeries,
    rescaled: &EnergySeries,
    lambda: f64,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(ConformalError::InvalidParameter(format!("lambda = {lambda}")));
    }
    let shift = conformal_shift(lambda);
    let mut worst: Option<f64> = None;
    for (tau, w) in rescaled.tau.iter().zip(&rescaled.value) {
        if let Some(lhs) = original.at(tau + shift) {
            let d = (lhs - w).abs();
            worst = Some(worst.map_or(d, |m: f64| m.max(d)));
        }
    }
    worst.ok_or(ConformalError::InsufficientCoverage)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaussian_calculus::make_grid;

    #[test]
    fn time_maps_are_inverse() {
        for t in [-1.0, -0.3, -1e-4] {
            assert!((time_of(tau_of(t)) - t).abs() < 1e-15);
        }
        assert_eq!(tau_of(-1.0), 0.0);
        assert!((conformal_shift((-0.5f64).exp()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frame_validation_and_steps() {
        assert!(ConformalFrame::new(-1.0, 1.0, 0.1).is_err());
        assert!(ConformalFrame::new(1.5, 1.0, 0.0).is_err());
        let f = ConformalFrame::new(1.5, 1.0, 0.1).unwrap();
        assert_eq!(f.steps(), 10);
        assert!(f.is_experimental());
        assert!(ConformalFrame::new(4.0, 1.0, 0.1).unwrap().is_experimental());
        assert!(!ConformalFrame::new(2.5, 1.0, 0.1).unwrap().is_experimental());
    }

    #[test]
    fn unit_time_slice_is_a_dilation() {
        let g = make_grid(2, 2.0, 0.5).unwrap();
        let u = FnSolution::new(2, |x: &[f64], _t| x[0] * x[0] + x[1]);
        let f = to_selfsimilar(&u, 2.0, -1.0, &g).unwrap();
        assert_eq!(f.time(), 0.0);
        for i in 0..g.len() {
            let y = g.coord(i);
            let expect = 4.0 * y[0] * y[0] + 2.0 * y[1];
            assert!((f.values()[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn nonnegative_time_is_rejected() {
        let g = make_grid(2, 1.0, 0.5).unwrap();
        let u = FnSolution::new(2, |_: &[f64], _| 0.0);
        assert!(matches!(
            to_selfsimilar(&u, 1.5, 0.0, &g),
            Err(ConformalError::NonNegativeTime(_))
        ));
    }

    #[test]
    fn series_interpolation_and_coverage() {
        let s = EnergySeries::new(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.at(0.5), Some(1.0));
        assert_eq!(s.at(2.0), Some(3.0));
        assert_eq!(s.at(2.5), None);
        let r = EnergySeries::new(vec![5.0], vec![1.0]).unwrap();
        assert!(matches!(
            weiss_shift_identity_check(&s, &r, 1.0),
            Err(ConformalError::InsufficientCoverage)
        ));
        assert_eq!(weiss_shift_identity_check(&s, &s, 1.0).unwrap(), 0.0);
    }
}
