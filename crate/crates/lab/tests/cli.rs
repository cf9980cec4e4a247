use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lab(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .env("LAB_OUTPUT_ROOT", root)
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn negative_epsilon_is_a_config_error() {
    let root = scratch("eps");
    let out = lab(&root, &["run", "crossval", "--set", "params.epsilons=[0.1, -0.01]"]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
    assert!(!root.join("crossval").exists());
}

#[test]
fn unknown_experiment_and_bad_override() {
    let root = scratch("unknown");
    assert_eq!(lab(&root, &["run", "no-such-thing"]).status.code(), Some(2));
    assert_eq!(lab(&root, &["run", "spectrum", "--set", "novalue"]).status.code(), Some(2));
}

#[test]
fn run_report_and_plot() {
    let root = scratch("run");
    let out = lab(
        &root,
        &[
            "run",
            "spectrum",
            "--deterministic",
            "--set",
            "params.cells=[10, 20]",
            "--set",
            "params.residual_h=0.1",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("[PASS] 12"));

    let dir = root.join("spectrum");
    let report = lab(&root, &["report", dir.to_str().unwrap()]);
    assert_eq!(report.status.code(), Some(0));
    assert!(text(&report.stdout).contains("spectrum"));

    std::fs::remove_file(dir.join("eigen_convergence.svg")).unwrap();
    let plot = lab(&root, &["plot", dir.to_str().unwrap(), "--deterministic"]);
    assert_eq!(plot.status.code(), Some(0), "{}", text(&plot.stderr));
    assert!(dir.join("eigen_convergence.svg").is_file());
}

#[test]
fn plot_without_tables_fails() {
    let root = scratch("empty");
    let out = lab(&root, &["plot", root.to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
    assert!(text(&out.stderr).contains("csv"), "{}", text(&out.stderr));
    let missing = lab(&root, &["report", root.join("nope").to_str().unwrap()]);
    assert_ne!(missing.status.code(), Some(0));
}
