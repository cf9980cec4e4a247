//! Reference normalization constants.
//!
//! The values live in `data/normalizers.json` (regenerate with
//! `cargo run --release -p exact-solutions --example generate_goldens`).
//! Each entry records the quadrature grid `(R, h)` it was computed on.
//! `m` is the index of `h_{2m}` for `"h2m"` entries and `0` otherwise;
//! `"hermite"` entries also carry the multi-index.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenEntry {
    pub quantity: String,
    pub n: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<usize>>,
    #[serde(rename = "R")]
    pub radius: f64,
    pub h: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFile {
    pub version: u32,
    pub entries: Vec<GoldenEntry>,
}

const RAW: &str = include_str!("../data/normalizers.json");

pub fn all() -> &'static GoldenFile {
    static FILE: OnceLock<GoldenFile> = OnceLock::new();
    FILE.get_or_init(|| serde_json::from_str(RAW).expect("embedded golden file is valid JSON"))
}

fn find(pred: impl Fn(&GoldenEntry) -> bool) -> Option<f64> {
    all().entries.iter().find(|e| pred(e)).map(|e| e.value)
}

/// `c_n` for the unit 3/2-homogeneous profile.
pub fn profile_constant(n: usize) -> Option<f64> {
    find(|e| e.quantity == "profile" && e.n == n)
}

/// `C_{m,n}` for `h_{2m}`.
pub fn h2m_constant(n: usize, m: usize) -> Option<f64> {
    find(|e| e.quantity == "h2m" && e.n == n && e.m == m)
}

/// `c_alpha` from the reference quadrature.
pub fn hermite_constant(alpha: &[usize]) -> Option<f64> {
    find(|e| e.quantity == "hermite" && e.alpha.as_deref() == Some(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parses_and_has_current_version() {
        let f = all();
        assert_eq!(f.version, FORMAT_VERSION);
        assert!(profile_constant(2).is_some());
        assert!(profile_constant(3).is_some());
        assert!(h2m_constant(2, 1).is_some());
        assert!(hermite_constant(&[2, 0]).is_some());
    }
}
