use std::io::Write;

use gaussian_calculus::io::fmt_f64;
use gaussian_calculus::{inner_mu, GaussianMeasure, WeightedField};

use crate::energy::{modified_energy, weiss_energy};
use crate::proj2m::{lambda_2m, project_e2m, E2mBasis};
use crate::proj32::{project_e32, ProfileFamily};
use crate::{DiagError, Result};

/// One stored state of a trajectory: the field at `tau = field.time()` and
/// the normal derivative `d_n u` at every boundary node, in boundary-node
/// order, as enforced by the solver.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub field: WeightedField,
    pub normal_derivative: Vec<f64>,
}

impl Snapshot {
    pub fn tau(&self) -> f64 {
        self.field.time()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub tau: f64,
    pub weiss: f64,
    pub norm_sq: f64,
    /// `int |d_tau u|^2 dmu` integrated over the step that ended at `tau`.
    pub dissipation: f64,
    pub lambda: Option<f64>,
    pub angle: Option<f64>,
    pub v_norm_sq: Option<f64>,
    pub lambda_2m: Option<f64>,
    pub weiss_modified: Option<f64>,
    /// `lambda_alpha`, ordered as the trace's labels.
    pub coeffs: Vec<f64>,
}

impl TraceRow {
    fn is_finite(&self) -> bool {
        let opts = [
            self.lambda,
            self.angle,
            self.v_norm_sq,
            self.lambda_2m,
            self.weiss_modified,
        ];
        [self.tau, self.weiss, self.norm_sq, self.dissipation]
            .iter()
            .chain(opts.iter().flatten())
            .chain(&self.coeffs)
            .all(|v| v.is_finite())
    }
}

/// Time series of the energy diagnostics of one run.
///
/// CSV columns, in order:
/// `tau,weiss,norm_sq,dissipation,lambda,angle,v_norm_sq,lambda_2m,weiss_modified`
/// followed by one `lambda_<alpha>` column per label. Absent optional
/// values are written as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct WeissTrace {
    pub kappa: f64,
    pub coeff_labels: Vec<String>,
    rows: Vec<TraceRow>,
}

impl WeissTrace {
    pub fn new(kappa: f64, coeff_labels: Vec<String>) -> Self {
        Self {
            kappa,
            coeff_labels,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: TraceRow) -> Result<()> {
        if !row.is_finite() {
            return Err(DiagError::InvalidArgument(format!(
                "non-finite entry in trace row at tau = {}",
                row.tau
            )));
        }
        if row.coeffs.len() != self.coeff_labels.len() {
            return Err(DiagError::InvalidArgument(format!(
                "row has {} coefficients, trace has {} labels",
                row.coeffs.len(),
                self.coeff_labels.len()
            )));
        }
        if let Some(last) = self.rows.last() {
            if !(row.tau > last.tau) {
                return Err(DiagError::InvalidArgument(format!(
                    "tau must increase: {} after {}",
                    row.tau, last.tau
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn taus(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.tau).collect()
    }

    pub fn weiss(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.weiss).collect()
    }

    pub fn norm_sq(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.norm_sq).collect()
    }

    /// The modified energy where present, otherwise `W`.
    pub fn monotone_energy(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.weiss_modified.unwrap_or(r.weiss))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec![
            "tau",
            "weiss",
            "norm_sq",
            "dissipation",
            "lambda",
            "angle",
            "v_norm_sq",
            "lambda_2m",
            "weiss_modified",
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        header.extend(self.coeff_labels.iter().map(|l| format!("lambda_{l}")));
        writeln!(w, "{}", header.join(","))?;
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        for r in &self.rows {
            let mut cells = vec![
                fmt_f64(r.tau),
                fmt_f64(r.weiss),
                fmt_f64(r.norm_sq),
                fmt_f64(r.dissipation),
                opt(r.lambda),
                opt(r.angle),
                opt(r.v_norm_sq),
                opt(r.lambda_2m),
                opt(r.weiss_modified),
            ];
            cells.extend(r.coeffs.iter().map(|c| fmt_f64(*c)));
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Which projection accompanies the energy on every trace row.
pub enum Monitor {
    Plain,
    E32(Box<dyn ProfileFamily + Send + Sync>),
    E2m(E2mBasis),
}

impl Monitor {
    pub fn coeff_labels(&self) -> Vec<String> {
        match self {
            Monitor::E2m(basis) => basis
                .indices()
                .iter()
                .map(|a| a.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(""))
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn new_trace(&self, kappa: f64) -> WeissTrace {
        WeissTrace::new(kappa, self.coeff_labels())
    }

    /// Diagnostics of one field. `forcing_bound` is `M` of the modified
    /// energy, for forced runs.
    pub fn row(
        &self,
        u: &WeightedField,
        kappa: f64,
        m: &GaussianMeasure,
        dissipation: f64,
        forcing_bound: Option<f64>,
    ) -> Result<TraceRow> {
        let tau = u.time();
        let weiss = weiss_energy(u, kappa, m)?;
        let mut row = TraceRow {
            tau,
            weiss,
            norm_sq: inner_mu(u, u, m)?,
            dissipation,
            lambda: None,
            angle: None,
            v_norm_sq: None,
            lambda_2m: None,
            weiss_modified: forcing_bound.map(|b| modified_energy(weiss, tau, b)),
            coeffs: Vec::new(),
        };
        match self {
            Monitor::Plain => {}
            Monitor::E32(family) => {
                let dec = project_e32(u, family.as_ref(), m)?;
                row.lambda = Some(dec.lambda);
                row.angle = Some(dec.angle);
                row.v_norm_sq = Some(inner_mu(&dec.remainder, &dec.remainder, m)?);
            }
            Monitor::E2m(basis) => {
                let dec = project_e2m(u, basis, m)?;
                row.v_norm_sq = Some(inner_mu(&dec.remainder, &dec.remainder, m)?);
                row.lambda_2m = Some(lambda_2m(u, basis, m)?);
                row.coeffs = dec.coeffs;
            }
        }
        Ok(row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(tau: f64, weiss: f64) -> TraceRow {
        TraceRow {
            tau,
            weiss,
            norm_sq: 1.0,
            dissipation: 0.0,
            lambda: None,
            angle: None,
            v_norm_sq: None,
            lambda_2m: None,
            weiss_modified: None,
            coeffs: vec![],
        }
    }

    #[test]
    fn rejects_non_increasing_tau() {
        let mut t = WeissTrace::new(1.5, vec![]);
        t.push(row(0.0, 1.0)).unwrap();
        assert!(t.push(row(0.0, 1.0)).is_err());
        assert!(t.push(row(0.1, f64::NAN)).is_err());
        t.push(row(0.1, 0.5)).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn csv_has_fixed_columns() {
        let mut t = WeissTrace::new(2.0, vec!["20".into(), "02".into()]);
        let mut r = row(0.0, 0.25);
        r.coeffs = vec![1.0, 0.0];
        r.lambda_2m = Some(0.5);
        t.push(r).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "tau,weiss,norm_sq,dissipation,lambda,angle,v_norm_sq,lambda_2m,weiss_modified,lambda_20,lambda_02"
        );
        let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(cells.len(), 11);
        assert_eq!(cells[4], "");
        assert_eq!(cells[7], "5.0000000000000000e-1");
    }
}
