//! Experiment runner for the self-similar thin obstacle flow.
//!
//! A run resolves an [`ExperimentConfig`], executes one named experiment,
//! writes its traces and tables as CSV and JSON, renders SVG plots of every
//! trace, and ends with a `report.json` holding the resolved config, one
//! check per acceptance criterion the experiment covers, and a manifest of
//! every artifact with its SHA-256.
//!
//! Under the deterministic flag nothing time-dependent is written, so two
//! runs of the same config produce byte-identical files.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use thiserror::Error;

pub mod config;
pub mod experiments;
pub mod output;
pub mod plot;
pub mod recipe;
pub mod report;

pub use config::{load, resolve, Experiment, ExperimentConfig, Override};
pub use output::{Artifacts, FileEntry};
pub use report::{Check, RunReport, RunStatus, Timing};

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("plot: {0}")]
    Plot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Calc(#[from] gaussian_calculus::CalcError),
    #[error(transparent)]
    Exact(#[from] exact_solutions::ExactError),
    #[error(transparent)]
    Conformal(#[from] conformal_transform::ConformalError),
    #[error(transparent)]
    Diag(#[from] weiss_diagnostics::DiagError),
    #[error(transparent)]
    Solver(#[from] signorini_solver::SolverError),
    #[error(transparent)]
    FreeBoundary(#[from] free_boundary::FbError),
    #[error(transparent)]
    Spectrum(#[from] ou_spectrum::SpectrumError),
}

impl LabError {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

pub const REPORT_FILE: &str = "report.json";

/// Execute the configured experiment end to end.
///
/// Runtime failures do not return `Err`: the report is written with a
/// failed status, and the artifacts produced so far stay on disk. `Err` is
/// returned only when the output directory or the report itself cannot be
/// written.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    run_in(cfg, &cfg.output_dir())
}

/// As [`run`] with an explicit output directory.
pub fn run_in(cfg: &ExperimentConfig, dir: &Path) -> Result<RunReport> {
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut ctx = experiments::Context::new(cfg, dir)?;
    log::info!("running {} into {}", cfg.experiment, dir.display());
    let outcome = experiments::execute(&mut ctx).and_then(|()| {
        plot::plot_artifacts(&mut ctx.out, cfg.deterministic).map(|warnings| {
            for w in warnings {
                log::warn!("{w}");
            }
        })
    });
    let status = match outcome {
        Ok(()) => RunStatus::Completed,
        Err(e) => {
            log::error!("{} failed: {e}", cfg.experiment);
            RunStatus::Failed {
                error: e.to_string(),
            }
        }
    };
    let report = RunReport {
        experiment: cfg.experiment.name().to_string(),
        seed: cfg.seed,
        config: cfg.to_json(),
        status,
        checks: std::mem::take(&mut ctx.checks),
        files: ctx.out.manifest(),
        timing: (!cfg.deterministic).then(|| Timing {
            started_unix,
            seconds: started.elapsed().as_secs_f64(),
        }),
    };
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    std::fs::write(dir.join(REPORT_FILE), bytes)?;
    Ok(report)
}

pub fn read_report(dir: &Path) -> Result<RunReport> {
    let path = dir.join(REPORT_FILE);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| LabError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}
