use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

/// Output root used when neither the config nor `LAB_OUTPUT_ROOT` names one.
pub const DEFAULT_OUTPUT_ROOT: &str = "runs";
pub const OUTPUT_ROOT_VAR: &str = "LAB_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Experiment {
    #[serde(rename = "stationarity")]
    Stationarity,
    #[serde(rename = "decay-32")]
    Decay32,
    #[serde(rename = "decay-2m")]
    Decay2m,
    #[serde(rename = "inhomogeneous-32")]
    Inhomogeneous32,
    #[serde(rename = "frequency-gap")]
    FrequencyGap,
    #[serde(rename = "regular-fb")]
    RegularFb,
    #[serde(rename = "spectrum")]
    Spectrum,
    #[serde(rename = "crossval")]
    Crossval,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Stationarity,
        Experiment::Decay32,
        Experiment::Decay2m,
        Experiment::Inhomogeneous32,
        Experiment::FrequencyGap,
        Experiment::RegularFb,
        Experiment::Spectrum,
        Experiment::Crossval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Stationarity => "stationarity",
            Experiment::Decay32 => "decay-32",
            Experiment::Decay2m => "decay-2m",
            Experiment::Inhomogeneous32 => "inhomogeneous-32",
            Experiment::FrequencyGap => "frequency-gap",
            Experiment::RegularFb => "regular-fb",
            Experiment::Spectrum => "spectrum",
            Experiment::Crossval => "crossval",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    /// Space dimension, 2 or 3.
    pub n: usize,
    /// Truncation radius `R` of `[-R, R]^{n-1} x [0, R]`.
    pub radius: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Projected,
    Penalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    pub dtau: f64,
    pub tau_max: f64,
    pub scheme: SchemeKind,
    /// Penalty parameter; used by the penalized scheme only, but always
    /// validated.
    pub epsilon: f64,
    pub tolerance: f64,
    pub relaxation: f64,
    pub snapshot_stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// The closed-form 3/2-profile sampled at the nodes.
    He,
    /// The discrete stationary 3/2-profile of the scheme.
    Balanced,
    /// The normalized `h_{2m}`.
    H2m,
    /// Random windowed Hermite data, shifted to a nonnegative trace.
    Random,
}

/// Initial data: a base profile, a perturbation amplitude and a run count.
/// Every random draw comes from the run's single generator, seeded by the
/// top-level `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataRecipe {
    pub profile: ProfileKind,
    /// Relative `L^2_mu` size of the perturbation.
    pub perturbation: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// Output directory, relative to the output root unless absolute.
    pub output: String,
    pub deterministic: bool,
    pub grid: GridParams,
    pub solver: SolverParams,
    pub data: DataRecipe,
    /// Experiment-specific parameters; resolved against the experiment's
    /// defaults by [`resolve`].
    #[serde(default)]
    pub params: toml::Table,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let grid = |n, radius, h| GridParams { n, radius, h };
        let solver = |dtau, tau_max| SolverParams {
            dtau,
            tau_max,
            scheme: SchemeKind::Projected,
            epsilon: 1e-3,
            tolerance: 1e-10,
            relaxation: 1.5,
            snapshot_stride: 1,
        };
        let data = |profile, perturbation, runs| DataRecipe {
            profile,
            perturbation,
            runs,
        };
        let (g, s, d) = match experiment {
            Experiment::Stationarity => (grid(2, 6.0, 0.05), solver(0.01, 5.0), data(ProfileKind::He, 0.0, 1)),
            Experiment::Decay32 => (
                grid(2, 6.0, 0.1),
                solver(0.02, 6.0),
                data(ProfileKind::Balanced, 0.1, 10),
            ),
            Experiment::Decay2m => (
                grid(2, 6.0, 0.1),
                solver(0.02, 3.0),
                data(ProfileKind::H2m, 0.05, 10),
            ),
            Experiment::Inhomogeneous32 => (
                grid(2, 6.0, 0.1),
                solver(0.02, 6.0),
                data(ProfileKind::Balanced, 0.1, 5),
            ),
            Experiment::FrequencyGap => (
                grid(2, 6.0, 0.1),
                solver(0.01, 1.0),
                data(ProfileKind::H2m, 0.1, 1),
            ),
            Experiment::RegularFb => (
                grid(3, 3.0, 0.25),
                solver(0.05, 1.0),
                data(ProfileKind::He, 0.05, 1),
            ),
            Experiment::Spectrum => (grid(2, 6.0, 0.1), solver(0.02, 1.0), data(ProfileKind::He, 0.0, 1)),
            Experiment::Crossval => (
                grid(2, 5.0, 0.2),
                solver(0.02, 1.0),
                data(ProfileKind::Random, 1.0, 3),
            ),
        };
        Self {
            experiment,
            seed: 20_241_017,
            output: experiment.name().to_string(),
            deterministic: false,
            grid: g,
            solver: s,
            data: d,
            params: toml::Table::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::Config(msg));
        let g = &self.grid;
        if !(g.n == 2 || g.n == 3) {
            return bad(format!("grid.n must be 2 or 3, got {}", g.n));
        }
        if !(g.radius > 0.0 && g.radius.is_finite()) {
            return bad(format!("grid.radius must be positive, got {}", g.radius));
        }
        if !(g.h > 0.0 && g.h < g.radius) {
            return bad(format!("grid.h must lie in (0, radius), got {}", g.h));
        }
        let s = &self.solver;
        if !(s.dtau > 0.0 && s.dtau < 1.0) {
            return bad(format!("solver.dtau must lie in (0, 1), got {}", s.dtau));
        }
        if !(s.tau_max >= 0.0 && s.tau_max.is_finite()) {
            return bad(format!("solver.tau_max must be nonnegative, got {}", s.tau_max));
        }
        if !(s.epsilon > 0.0 && s.epsilon.is_finite()) {
            return bad(format!("solver.epsilon must be positive, got {}", s.epsilon));
        }
        if !(s.tolerance > 0.0) {
            return bad(format!("solver.tolerance must be positive, got {}", s.tolerance));
        }
        if !(s.relaxation > 0.0 && s.relaxation < 2.0) {
            return bad(format!("solver.relaxation must lie in (0, 2), got {}", s.relaxation));
        }
        if s.snapshot_stride == 0 {
            return bad("solver.snapshot_stride must be positive".into());
        }
        if !(self.data.perturbation >= 0.0 && self.data.perturbation.is_finite()) {
            return bad(format!(
                "data.perturbation must be nonnegative, got {}",
                self.data.perturbation
            ));
        }
        if self.data.runs == 0 {
            return bad("data.runs must be positive".into());
        }
        if self.output.is_empty() {
            return bad("output must name a directory".into());
        }
        Ok(())
    }

    /// The output directory: absolute paths are kept, relative ones are
    /// joined to `LAB_OUTPUT_ROOT` (or `runs`).
    pub fn output_dir(&self) -> PathBuf {
        let p = Path::new(&self.output);
        if p.is_absolute() {
            return p.to_path_buf();
        }
        let root = std::env::var_os(OUTPUT_ROOT_VAR)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT));
        root.join(p)
    }

    /// Typed view of the experiment parameters.
    pub fn params<P: DeserializeOwned>(&self) -> Result<P> {
        toml::Value::Table(self.params.clone())
            .try_into()
            .map_err(|e| LabError::Config(format!("params: {e}")))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes to JSON")
    }
}

/// One `--set key=value` override. The value is read as a TOML literal
/// when it parses as one and as a bare string otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: toml::Value,
}

impl FromStr for Override {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| LabError::Config(format!("override `{s}` is not key=value")))?;
        let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
        if path.iter().any(|p| p.is_empty()) {
            return Err(LabError::Config(format!("bad override key `{key}`")));
        }
        let raw = raw.trim();
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        Ok(Self { path, value })
    }
}

fn apply_override(table: &mut toml::Table, o: &Override) -> Result<()> {
    let (last, parents) = o.path.split_last().expect("nonempty path");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| LabError::Config(format!("`{p}` is not a table")))?;
    }
    cur.insert(last.clone(), o.value.clone());
    Ok(())
}

/// `over` wins; nested tables merge key by key.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Resolve a config: overrides on top of the file, the result on top of the
/// experiment's defaults, experiment parameters filled in and validated.
pub fn resolve(
    text: &str,
    overrides: &[Override],
    deterministic: bool,
) -> Result<ExperimentConfig> {
    let mut user: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut user, o)?;
    }
    let name = user
        .get("experiment")
        .and_then(|v| v.as_str())
        .ok_or_else(|| LabError::Config("missing `experiment`".into()))?;
    let experiment: Experiment = name.parse()?;
    let mut table = toml::Table::try_from(ExperimentConfig::defaults(experiment))
        .map_err(|e| LabError::Config(e.to_string()))?;
    merge(&mut table, user);
    let mut cfg: ExperimentConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e| LabError::Config(e.to_string()))?;
    cfg.deterministic |= deterministic;
    cfg.validate()?;
    cfg.params = crate::experiments::resolve_params(&cfg)?;
    Ok(cfg)
}

/// Resolve the config file at `path`.
pub fn load(path: &Path, overrides: &[Override], deterministic: bool) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    resolve(&text, overrides, deterministic)
}

/// Typed parameters merged over their defaults, returned as a table for the
/// config echo.
pub(crate) fn resolve_typed<P>(raw: &toml::Table) -> Result<(P, toml::Table)>
where
    P: Default + Serialize + DeserializeOwned,
{
    let mut table =
        toml::Table::try_from(P::default()).map_err(|e| LabError::Config(e.to_string()))?;
    merge(&mut table, raw.clone());
    let p: P = toml::Value::Table(table.clone())
        .try_into()
        .map_err(|e| LabError::Config(format!("params: {e}")))?;
    Ok((p, table))
}
