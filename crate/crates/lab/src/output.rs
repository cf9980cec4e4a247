use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use gaussian_calculus::io::fmt_f64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use weiss_diagnostics::WeissTrace;

use crate::Result;

/// One written artifact: path relative to the run directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writer for the artifacts of one run. Every file goes through here, so
/// the manifest is complete and files already written survive a later
/// failure.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    seed: u64,
    experiment: String,
    files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn create(dir: &Path, experiment: &str, seed: u64) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            seed,
            experiment: experiment.to_string(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Manifest sorted by path.
    pub fn manifest(&self) -> Vec<FileEntry> {
        let mut v = self.files.clone();
        v.sort_by(|a, b| a.path.cmp(&b.path));
        v
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    fn csv_preamble(&self) -> String {
        format!("# experiment={} seed={}\n", self.experiment, self.seed)
    }

    /// CSV with a seed comment line, a header row and one row per record.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let mut out = self.csv_preamble();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in rows {
            debug_assert_eq!(r.len(), header.len());
            let cells: Vec<String> = r.iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        self.write(name, out.as_bytes())
    }

    pub fn trace(&mut self, name: &str, trace: &WeissTrace) -> Result<()> {
        let mut out = self.csv_preamble().into_bytes();
        trace.write_csv(&mut out)?;
        self.write(name, &out)
    }

    /// Pretty JSON wrapped with the seed and experiment name.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            experiment: &'a str,
            seed: u64,
            data: &'a T,
        }
        let w = Wrapped {
            experiment: &self.experiment,
            seed: self.seed,
            data: value,
        };
        let mut bytes = serde_json::to_vec_pretty(&w)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let mut f = Vec::new();
        f.write_all(text.as_bytes())?;
        self.write(name, &f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_tracks_rewrites_and_hashes() {
        let dir = std::env::temp_dir().join(format!("lab-output-{}", std::process::id()));
        let mut a = Artifacts::create(&dir, "crossval", 5).unwrap();
        a.csv("b.csv", &["x", "y"], &[vec![1.0, 0.1]]).unwrap();
        a.csv("a.csv", &["x"], &[]).unwrap();
        a.csv("b.csv", &["x", "y"], &[vec![2.0, 0.2]]).unwrap();
        let m = a.manifest();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].path, "a.csv");
        let text = fs::read_to_string(dir.join("b.csv")).unwrap();
        assert_eq!(
            text,
            "# experiment=crossval seed=5\nx,y\n2.0000000000000000e0,2.0000000000000001e-1\n"
        );
        assert_eq!(m[1].sha256, sha256_hex(text.as_bytes()));
        fs::remove_dir_all(dir).unwrap();
    }
}
