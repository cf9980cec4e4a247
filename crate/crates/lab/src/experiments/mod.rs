use std::path::Path;
use std::time::Instant;

use conformal_transform::ConformalFrame;
use exact_solutions::{eval_profile32, Profile32};
use gaussian_calculus::{make_grid, HalfSpaceGrid, WeightedField};
use serde::de::DeserializeOwned;
use serde::Serialize;
use signorini_solver::{balanced_profile, BalancedProfile, Scheme, SolverConfig};

use crate::config::{resolve_typed, ExperimentConfig, SchemeKind};
use crate::output::Artifacts;
use crate::recipe::{self, LabRng};
use crate::report::Check;
use crate::{Experiment, LabError, Result};

mod crossval;
mod decay2m;
mod decay32;
mod energy;
mod freqgap;
mod inhomogeneous;
mod regularfb;
mod spectrum;
mod stationarity;

/// Experiment parameters: defaults plus a validation hook.
pub(crate) trait Params: Default + Serialize + DeserializeOwned {
    fn validate(&self) -> Result<()> {
        Ok(())
    }
}

pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    /// The run's only source of randomness.
    pub rng: LabRng,
    pub out: Artifacts,
    pub checks: Vec<Check>,
    pub started: Instant,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a ExperimentConfig, dir: &Path) -> Result<Self> {
        Ok(Self {
            cfg,
            rng: recipe::rng(cfg.seed),
            out: Artifacts::create(dir, cfg.experiment.name(), cfg.seed)?,
            checks: Vec::new(),
            started: Instant::now(),
        })
    }

    pub(crate) fn params<P: Params>(&self) -> Result<P> {
        self.cfg.params()
    }

    pub fn check(&mut self, c: Check) {
        log::info!("{}", c.line());
        self.checks.push(c);
    }

    /// Wall-clock note for check details; empty under the deterministic
    /// flag so reports stay byte-identical.
    pub fn timing_note(&self, label: &str, seconds: f64) -> String {
        if self.cfg.deterministic {
            String::new()
        } else {
            format!("; {label} {seconds:.1} s")
        }
    }

    pub fn grid(&self) -> Result<HalfSpaceGrid> {
        let g = &self.cfg.grid;
        Ok(make_grid(g.n, g.radius, g.h)?)
    }

    /// Solver settings from the config with the given homogeneity and time
    /// grid.
    pub fn solver_config(&self, kappa: f64, dtau: f64, tau_max: f64) -> Result<SolverConfig> {
        let s = &self.cfg.solver;
        let scheme = match s.scheme {
            SchemeKind::Projected => Scheme::Projected,
            SchemeKind::Penalized => Scheme::Penalized { epsilon: s.epsilon },
        };
        let mut c = SolverConfig::new(ConformalFrame::new(kappa, tau_max, dtau)?, scheme);
        c.tolerance = s.tolerance;
        c.relaxation = s.relaxation;
        c.snapshot_stride = s.snapshot_stride;
        c.validate()?;
        Ok(c)
    }

    pub fn default_solver(&self, kappa: f64) -> Result<SolverConfig> {
        self.solver_config(kappa, self.cfg.solver.dtau, self.cfg.solver.tau_max)
    }
}

/// Reference constant of the 3/2-profile in dimension `n`.
pub(crate) fn profile_constant(n: usize) -> Result<f64> {
    exact_solutions::goldens::profile_constant(n)
        .ok_or_else(|| LabError::Runtime(format!("no profile constant for n = {n}")))
}

fn e1(n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n - 1];
    e[0] = 1.0;
    e
}

/// The closed-form unit-amplitude `h_{e_1}` sampled at the nodes.
pub(crate) fn sampled_he(grid: &HalfSpaceGrid) -> Result<WeightedField> {
    let p = Profile32::new(1.0, &e1(grid.dim()), profile_constant(grid.dim())?)?;
    Ok(eval_profile32(&p, grid)?)
}

/// Discrete stationary profile with direction `e_1` and `count` modes.
pub(crate) fn balanced(grid: &HalfSpaceGrid, count: usize) -> Result<BalancedProfile> {
    let bp = balanced_profile(grid, &e1(grid.dim()), profile_constant(grid.dim())?, count)?;
    if bp.min_contact_force < 0.0 {
        return Err(LabError::Runtime(format!(
            "balanced profile has negative contact force {}",
            bp.min_contact_force
        )));
    }
    Ok(bp)
}

/// Snapshot stride that keeps roughly ten states per unit of `tau`.
pub(crate) fn tenth_stride(dtau: f64) -> usize {
    ((0.1 / dtau).round() as usize).max(1)
}

pub(crate) fn resolve_params(cfg: &ExperimentConfig) -> Result<toml::Table> {
    fn typed<P: Params>(raw: &toml::Table) -> Result<toml::Table> {
        let (p, table) = resolve_typed::<P>(raw)?;
        p.validate()?;
        Ok(table)
    }
    let raw = &cfg.params;
    match cfg.experiment {
        Experiment::Stationarity => typed::<stationarity::StationarityParams>(raw),
        Experiment::Decay32 => typed::<decay32::Decay32Params>(raw),
        Experiment::Decay2m => typed::<decay2m::Decay2mParams>(raw),
        Experiment::Inhomogeneous32 => typed::<inhomogeneous::InhomogeneousParams>(raw),
        Experiment::FrequencyGap => typed::<freqgap::FrequencyGapParams>(raw),
        Experiment::RegularFb => typed::<regularfb::RegularFbParams>(raw),
        Experiment::Spectrum => typed::<spectrum::SpectrumParams>(raw),
        Experiment::Crossval => typed::<crossval::CrossvalParams>(raw),
    }
}

pub(crate) fn execute(ctx: &mut Context<'_>) -> Result<()> {
    match ctx.cfg.experiment {
        Experiment::Stationarity => stationarity::run(ctx),
        Experiment::Decay32 => decay32::run(ctx),
        Experiment::Decay2m => decay2m::run(ctx),
        Experiment::Inhomogeneous32 => inhomogeneous::run(ctx),
        Experiment::FrequencyGap => freqgap::run(ctx),
        Experiment::RegularFb => regularfb::run(ctx),
        Experiment::Spectrum => spectrum::run(ctx),
        Experiment::Crossval => crossval::run(ctx),
    }
}

pub(crate) fn bad_param(msg: impl Into<String>) -> LabError {
    LabError::Config(format!("params: {}", msg.into()))
}

pub(crate) fn require_positive(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        Some(v) => Err(bad_param(format!("{name} must be positive, got {v}"))),
        None => Ok(()),
    }
}
