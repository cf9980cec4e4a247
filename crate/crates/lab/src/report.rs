use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::output::FileEntry;

/// Outcome of one acceptance check. `measured` and `limit` are the headline
/// number and the pinned tolerance it is compared against; `detail` holds
/// the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
    pub detail: String,
}

impl Check {
    pub fn new(criterion: u8, name: &str, passed: bool, measured: f64, limit: f64) -> Self {
        Self {
            criterion,
            name: name.to_string(),
            passed,
            measured,
            limit,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }

    /// `[PASS] 12 spectrum: measured 1.2e-3 (limit 5e-3) ...`
    pub fn line(&self) -> String {
        let mut s = format!(
            "[{}] {:>2} {}: measured {:.6e} (limit {:.3e})",
            self.status(),
            self.criterion,
            self.name,
            self.measured,
            self.limit
        );
        if !self.detail.is_empty() {
            let _ = write!(s, "; {}", self.detail);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed { error: String },
}

/// Wall-clock data, left out under the deterministic flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub status: RunStatus,
    pub checks: Vec<Check>,
    /// Every artifact except `report.json` itself.
    pub files: Vec<FileEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing: Option<Timing>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.status == RunStatus::Completed && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, criterion: u8) -> Option<&Check> {
        self.checks.iter().find(|c| c.criterion == criterion)
    }

    pub fn pretty(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment {} (seed {})", self.experiment, self.seed);
        match &self.status {
            RunStatus::Completed => {
                let _ = writeln!(s, "status: completed");
            }
            RunStatus::Failed { error } => {
                let _ = writeln!(s, "status: FAILED: {error}");
            }
        }
        if let Some(t) = &self.timing {
            let _ = writeln!(s, "runtime: {:.1} s", t.seconds);
        }
        let _ = writeln!(s, "checks:");
        for c in &self.checks {
            let _ = writeln!(s, "  {}", c.line());
        }
        let _ = writeln!(s, "files:");
        for f in &self.files {
            let _ = writeln!(s, "  {}  {:>9}  {}", &f.sha256[..16], f.bytes, f.path);
        }
        s
    }
}
