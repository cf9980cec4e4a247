//! Static SVG plots of the CSV artifacts.
//!
//! Recognized files:
//! - `trace_*.csv`: the energy linearly and on a log scale with a fitted
//!   line, the squared norm, and `lambda` when the column holds values;
//! - `hcurve_*.csv`: `H(r)` on log-log axes;
//! - `eigen_convergence.csv`: every eigenvalue against the spacing;
//! - `discrepancy_*.csv`: every column against the first, on a log scale.
//!
//! Other CSV files are left alone.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::output::Artifacts;
use crate::{LabError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 64.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// A parsed CSV: header and numeric rows, comment lines dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| LabError::Plot(format!("{name}: no header")))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let row: Vec<f64> = line
                .split(',')
                .map(|c| {
                    let c = c.trim();
                    if c.is_empty() {
                        Ok(f64::NAN)
                    } else {
                        c.parse::<f64>()
                    }
                })
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| LabError::Plot(format!("{name}: row {}: {e}", k + 1)))?;
            if row.len() != header.len() {
                return Err(LabError::Plot(format!(
                    "{name}: row {} has {} cells, header has {}",
                    k + 1,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(LabError::Plot(format!("{name}: header only, no data rows")));
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    fn require(&self, file: &str, name: &str) -> Result<Vec<f64>> {
        self.column(name)
            .ok_or_else(|| LabError::Plot(format!("{file}: missing column `{name}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn map(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log => v.log10(),
        }
    }

    fn admits(self, v: f64) -> bool {
        v.is_finite() && (self == Scale::Linear || v > 0.0)
    }
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
    dashed: bool,
}

struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    x_scale: Scale,
    y_scale: Scale,
    series: Vec<Series>,
}

impl Chart {
    fn new(title: &str, x_label: &str, y_label: &str, x_scale: Scale, y_scale: Scale) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x_scale,
            y_scale,
            series: Vec::new(),
        }
    }

    fn add(&mut self, label: &str, xs: &[f64], ys: &[f64], dashed: bool) {
        let points = xs
            .iter()
            .zip(ys)
            .filter(|(x, y)| self.x_scale.admits(**x) && self.y_scale.admits(**y))
            .map(|(x, y)| (self.x_scale.map(*x), self.y_scale.map(*y)))
            .collect();
        self.series.push(Series {
            label: label.to_string(),
            points,
            dashed,
        });
    }

    fn has_data(&self) -> bool {
        self.series.iter().any(|s| s.points.len() >= 2)
    }

    fn render(&self, stamp: Option<u64>) -> String {
        let all = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            let pad = if y0 == 0.0 { 1.0 } else { 0.1 * y0.abs() };
            y0 -= pad;
            y1 += pad;
        }
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        if let Some(t) = stamp {
            let _ = writeln!(s, "<!-- generated at unix time {t} -->");
        }
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                px(xv),
                HEIGHT - MARGIN + 16.0,
                tick(xv, self.x_scale)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                MARGIN - 4.0,
                py(yv) + 4.0,
                tick(yv, self.y_scale)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (k, series) in self.series.iter().enumerate() {
            if series.points.is_empty() {
                continue;
            }
            let color = COLORS[k % COLORS.len()];
            let path: Vec<String> = series
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let dash = if series.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                path.join(" ")
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                WIDTH - MARGIN + 4.0 - 120.0,
                MARGIN + 14.0 * (k as f64 + 1.0),
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64, scale: Scale) -> String {
    match scale {
        Scale::Linear => format!("{v:.3}"),
        Scale::Log => format!("1e{v:.1}"),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Least-squares line through `(x, ln |y|)` over the nonzero samples.
fn log_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite() && **y != 0.0)
        .map(|(x, y)| (*x, y.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    Some((slope, my - slope * mx))
}

/// SVG files rendered from one CSV, plus warnings.
#[derive(Debug, Default)]
pub struct Rendered {
    pub files: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

fn stem(name: &str) -> &str {
    name.strip_suffix(".csv").unwrap_or(name)
}

fn is_plottable(name: &str) -> bool {
    let base = Path::new(name).file_name().and_then(|s| s.to_str()).unwrap_or(name);
    base.ends_with(".csv")
        && (base.starts_with("trace_")
            || base.starts_with("hcurve_")
            || base.starts_with("discrepancy_")
            || base == "eigen_convergence.csv")
}

/// Render the plots of one recognized CSV file.
pub fn render_csv(name: &str, text: &str, stamp: Option<u64>) -> Result<Rendered> {
    let table = Table::parse(name, text)?;
    let mut out = Rendered::default();
    if table.rows.len() < 2 {
        out.warnings.push(format!("{name}: a single row, nothing to plot"));
        return Ok(out);
    }
    let base = Path::new(name).file_name().and_then(|s| s.to_str()).unwrap_or(name);
    let st = stem(name);
    let mut charts: Vec<(String, Chart)> = Vec::new();
    if base.starts_with("trace_") {
        let tau = table.require(name, "tau")?;
        let w = table.require(name, "weiss")?;
        let n = table.require(name, "norm_sq")?;
        let mut c = Chart::new(&format!("{st}: W"), "tau", "W", Scale::Linear, Scale::Linear);
        c.add("W", &tau, &w, false);
        charts.push((format!("{st}_weiss.svg"), c));
        let mut c = Chart::new(&format!("{st}: |W|"), "tau", "|W|", Scale::Linear, Scale::Log);
        let abs: Vec<f64> = w.iter().map(|v| v.abs()).collect();
        c.add("|W|", &tau, &abs, false);
        if let Some((slope, icpt)) = log_fit(&tau, &w) {
            let fitted: Vec<f64> = tau.iter().map(|t| (icpt + slope * t).exp()).collect();
            c.add(&format!("fit rate {:.3}", -slope), &tau, &fitted, true);
        }
        charts.push((format!("{st}_weiss_log.svg"), c));
        let mut c = Chart::new(&format!("{st}: |u|^2"), "tau", "|u|^2", Scale::Linear, Scale::Linear);
        c.add("|u|^2", &tau, &n, false);
        charts.push((format!("{st}_norm.svg"), c));
        if let Some(l) = table.column("lambda").filter(|l| l.iter().any(|v| v.is_finite())) {
            let mut c = Chart::new(&format!("{st}: lambda"), "tau", "lambda", Scale::Linear, Scale::Linear);
            c.add("lambda", &tau, &l, false);
            charts.push((format!("{st}_lambda.svg"), c));
        }
    } else if base.starts_with("hcurve_") {
        let r = table.require(name, "r")?;
        let h = table.require(name, "h")?;
        let mut c = Chart::new(&format!("{st}: H(r)"), "r", "H", Scale::Log, Scale::Log);
        c.add("H", &r, &h, false);
        charts.push((format!("{st}.svg"), c));
    } else if base == "eigen_convergence.csv" {
        let h = table.require(name, "h")?;
        let mut c = Chart::new("eigenvalues against spacing", "h", "lambda", Scale::Linear, Scale::Linear);
        for col in table.header.iter().filter(|c| c.starts_with("lambda_")) {
            let v = table.column(col).expect("header column");
            c.add(col, &h, &v, false);
        }
        charts.push((format!("{st}.svg"), c));
    } else if base.starts_with("discrepancy_") {
        let x = table.rows.iter().map(|r| r[0]).collect::<Vec<_>>();
        let mut c = Chart::new(&format!("{st}"), &table.header[0], "discrepancy", Scale::Linear, Scale::Log);
        for (k, col) in table.header.iter().enumerate().skip(1) {
            let v: Vec<f64> = table.rows.iter().map(|r| r[k]).collect();
            c.add(col, &x, &v, false);
        }
        charts.push((format!("{st}.svg"), c));
    }
    for (file, chart) in charts {
        if chart.has_data() {
            out.files.push((file, chart.render(stamp)));
        } else {
            out.warnings.push(format!("{file}: no plottable values"));
        }
    }
    Ok(out)
}

fn stamp(deterministic: bool) -> Option<u64> {
    (!deterministic).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    })
}

fn no_input(dir: &Path) -> LabError {
    LabError::Plot(format!(
        "no plottable CSV in {}: expected trace_*.csv, hcurve_*.csv, discrepancy_*.csv or eigen_convergence.csv",
        dir.display()
    ))
}

/// Plot every recognized CSV in the manifest and record the SVGs as
/// artifacts. Returns the warnings.
pub fn plot_artifacts(out: &mut Artifacts, deterministic: bool) -> Result<Vec<String>> {
    let names: Vec<String> = out
        .manifest()
        .into_iter()
        .map(|f| f.path)
        .filter(|p| is_plottable(p))
        .collect();
    if names.is_empty() {
        return Err(no_input(out.dir()));
    }
    let mut warnings = Vec::new();
    for name in names {
        let text = std::fs::read_to_string(out.dir().join(&name))?;
        let r = render_csv(&name, &text, stamp(deterministic))?;
        for (file, svg) in r.files {
            out.text(&file, &svg)?;
        }
        warnings.extend(r.warnings);
    }
    Ok(warnings)
}

/// Plot every recognized CSV in `dir`, writing the SVGs next to them.
pub fn plot_dir(dir: &Path, deterministic: bool) -> Result<Vec<String>> {
    if !dir.is_dir() {
        return Err(LabError::Plot(format!("{} is not a directory", dir.display())));
    }
    let mut names: Vec<String> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str().map(str::to_string))
        .filter(|n| is_plottable(n))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(no_input(dir));
    }
    let mut warnings = Vec::new();
    for name in names {
        let text = std::fs::read_to_string(dir.join(&name))?;
        let r = render_csv(&name, &text, stamp(deterministic))?;
        for (file, svg) in r.files {
            std::fs::write(dir.join(file), svg)?;
        }
        warnings.extend(r.warnings);
    }
    Ok(warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRACE: &str = "# experiment=x seed=1\ntau,weiss,norm_sq\n0,1,2\n0.5,0.5,1.5\n1,0.25,1.2\n";

    #[test]
    fn trace_gives_three_plots() {
        let r = render_csv("trace_a.csv", TRACE, None).unwrap();
        let names: Vec<&str> = r.files.iter().map(|f| f.0.as_str()).collect();
        assert_eq!(names, ["trace_a_weiss.svg", "trace_a_weiss_log.svg", "trace_a_norm.svg"]);
        assert!(r.files[1].1.contains("fit rate 1.386"));
        assert!(!r.files[0].1.contains("generated at"));
    }

    #[test]
    fn stamp_only_when_asked() {
        let r = render_csv("trace_a.csv", TRACE, Some(7)).unwrap();
        assert!(r.files[0].1.contains("unix time 7"));
    }

    #[test]
    fn header_only_is_an_error() {
        let e = render_csv("trace_a.csv", "# c\ntau,weiss,norm_sq\n", None).unwrap_err();
        assert!(e.to_string().contains("no data rows"), "{e}");
    }

    #[test]
    fn missing_column_is_an_error() {
        let e = render_csv("trace_a.csv", "tau,norm_sq\n0,1\n1,2\n", None).unwrap_err();
        assert!(e.to_string().contains("`weiss`"), "{e}");
    }

    #[test]
    fn single_row_warns() {
        let r = render_csv("trace_a.csv", "tau,weiss,norm_sq\n0,1,1\n", None).unwrap();
        assert!(r.files.is_empty());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn empty_cells_are_missing_values() {
        let t = Table::parse("t", "a,b\n1,\n2,3\n").unwrap();
        assert!(t.rows[0][1].is_nan());
    }

    #[test]
    fn empty_directory_names_the_expected_files() {
        let dir = std::env::temp_dir().join(format!("lab-plot-empty-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let e = plot_dir(&dir, true).unwrap_err();
        assert!(e.to_string().contains("trace_*.csv"), "{e}");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
