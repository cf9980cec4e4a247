use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use clap::{Parser, Subcommand};
use lab::{ExperimentConfig, LabError, Override, RunStatus};

#[derive(Parser)]
#[command(name = "lab", version, about = "Run, plot and report thin obstacle flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one or more experiment configs.
    ///
    /// Each argument is a TOML config file or the bare name of an
    /// experiment, which runs with its defaults. Several configs run as
    /// separate processes into disjoint output directories.
    Run {
        #[arg(required = true)]
        configs: Vec<String>,
        /// Override a config value, e.g. `--set solver.dtau=0.01`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Omit wall-clock data so repeated runs are byte-identical.
        #[arg(long)]
        deterministic: bool,
        /// Concurrent runs when several configs are given.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Render the SVG plots of an existing run directory.
    Plot {
        dir: PathBuf,
        #[arg(long)]
        deterministic: bool,
    },
    /// Print the report of an existing run directory.
    Report { dir: PathBuf },
}

fn config_for(arg: &str, overrides: &[Override], deterministic: bool) -> lab::Result<ExperimentConfig> {
    let path = Path::new(arg);
    if path.is_file() {
        return lab::load(path, overrides, deterministic);
    }
    match arg.parse::<lab::Experiment>() {
        Ok(e) => lab::resolve(&format!("experiment = \"{}\"", e.name()), overrides, deterministic),
        Err(_) => Err(LabError::Config(format!("{arg}: no such file or experiment"))),
    }
}

fn run_one(cfg: &ExperimentConfig) -> lab::Result<i32> {
    let report = lab::run(cfg)?;
    for c in &report.checks {
        println!("{}", c.line());
    }
    let dir = cfg.output_dir();
    Ok(match &report.status {
        RunStatus::Failed { error } => {
            eprintln!("{} failed: {error} (partial output in {})", cfg.experiment, dir.display());
            1
        }
        RunStatus::Completed if report.all_passed() => {
            println!("{}: all checks passed; output in {}", cfg.experiment, dir.display());
            0
        }
        RunStatus::Completed => {
            println!("{}: some checks failed; output in {}", cfg.experiment, dir.display());
            1
        }
    })
}

/// Run every config in its own child process, `jobs` at a time.
fn run_many(configs: &[String], raw: &[String], deterministic: bool, jobs: usize) -> lab::Result<i32> {
    let overrides: Vec<Override> = raw.iter().map(|s| s.parse()).collect::<lab::Result<_>>()?;
    let mut dirs = BTreeSet::new();
    for c in configs {
        let cfg = config_for(c, &overrides, deterministic)?;
        if !dirs.insert(cfg.output_dir()) {
            return Err(LabError::Config(format!(
                "{c}: output directory {} is used by another config",
                cfg.output_dir().display()
            )));
        }
    }
    let exe = std::env::current_exe()?;
    let mut worst = 0;
    for chunk in configs.chunks(jobs.max(1)) {
        let mut children = Vec::new();
        for c in chunk {
            let mut cmd = Command::new(&exe);
            cmd.arg("run").arg(c);
            for o in raw {
                cmd.arg("--set").arg(o);
            }
            if deterministic {
                cmd.arg("--deterministic");
            }
            children.push((c, cmd.spawn()?));
        }
        for (c, mut child) in children {
            let code = child.wait()?.code().unwrap_or(1);
            if code != 0 {
                eprintln!("{c}: exit code {code}");
            }
            worst = worst.max(code);
        }
    }
    Ok(worst)
}

fn dispatch(cli: Cli) -> lab::Result<i32> {
    match cli.command {
        Cmd::Run {
            configs,
            overrides,
            deterministic,
            jobs,
        } => {
            if configs.len() > 1 {
                return run_many(&configs, &overrides, deterministic, jobs);
            }
            let parsed: Vec<Override> = overrides.iter().map(|s| s.parse()).collect::<lab::Result<_>>()?;
            run_one(&config_for(&configs[0], &parsed, deterministic)?)
        }
        Cmd::Plot { dir, deterministic } => {
            for w in lab::plot::plot_dir(&dir, deterministic)? {
                eprintln!("warning: {w}");
            }
            Ok(0)
        }
        Cmd::Report { dir } => {
            print!("{}", lab::read_report(&dir)?.pretty());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code.clamp(0, 255) as u8)
}
