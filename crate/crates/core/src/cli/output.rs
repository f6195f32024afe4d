//! Result manifest, verdicts and file emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn check(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        let status = if pass { Status::Pass } else { Status::Fail };
        Verdict { name: name.into(), status, detail: detail.into() }
    }

    pub fn skipped(name: &str, detail: impl Into<String>) -> Self {
        Verdict { name: name.into(), status: Status::Skipped, detail: detail.into() }
    }
}

/// Everything a run produced. Timings live in a separate file so that the
/// manifest itself is reproducible.
#[derive(Clone, Debug, Serialize)]
pub struct ResultManifest {
    pub version: String,
    pub kind: String,
    pub config: Value,
    pub seeds: BTreeMap<String, u64>,
    pub outputs: Vec<String>,
    pub results: Value,
    pub warnings: Vec<String>,
    pub verdicts: Vec<Verdict>,
}

impl ResultManifest {
    /// No verdict failed; skipped verdicts do not count against the run.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";

/// Collects files written during a run.
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputDir { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.write(name, &(text + "\n"))
    }

    /// Files written so far plus the two bookkeeping files, sorted.
    pub fn listing(&self) -> Vec<String> {
        let mut all = self.files.clone();
        all.extend([MANIFEST_FILE.to_string(), TIMINGS_FILE.to_string()]);
        all.sort();
        all.dedup();
        all
    }
}

/// One polyline of a plot.
pub struct Line<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// A plain SVG line plot. Non-finite points are dropped; with `log_y` so
/// are nonpositive ones.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, lines: &[Line], log_y: bool) -> String {
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let tf = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<Vec<(f64, f64)>> = lines
        .iter()
        .map(|l| {
            l.points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0))
                .map(|&(x, y)| (x, tf(y)))
                .collect()
        })
        .collect();
    let all: Vec<(f64, f64)> = pts.iter().flatten().copied().collect();
    let bounds = |sel: fn(&(f64, f64)) -> f64| {
        let lo = all.iter().map(sel).fold(f64::INFINITY, f64::min);
        let hi = all.iter().map(sel).fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-300 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let y_fmt = |y: f64| if log_y { format!("1e{y:.1}") } else { format!("{y:.3e}") };
    let _ = writeln!(s, r#"<text x="{pad}" y="{}" text-anchor="start">{x0:.3}</text>"#, h - pad + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{x1:.3}</text>"#, w - pad, h - pad + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, pad - 4.0, h - pad, y_fmt(y0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, pad - 4.0, pad + 10.0, y_fmt(y1));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 16.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    for (k, (line, p)) in lines.iter().zip(&pts).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            w - pad - 150.0,
            pad + 16.0 * (k as f64 + 1.0),
            escape(line.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_includes_bookkeeping() {
        let tmp = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(tmp.path()).unwrap();
        out.write("b.csv", "x\n").unwrap();
        out.write("a.csv", "x\n").unwrap();
        out.write("a.csv", "y\n").unwrap();
        assert_eq!(out.listing(), vec!["a.csv", "b.csv", MANIFEST_FILE, TIMINGS_FILE]);
    }

    #[test]
    fn plot_is_well_formed() {
        let svg = line_plot(
            "t<1>",
            "n",
            "y",
            &[Line { label: "a", points: vec![(0.0, 1.0), (1.0, -1.0), (2.0, 0.5)] }],
            true,
        );
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("t&lt;1&gt;"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn skipped_does_not_fail() {
        let m = ResultManifest {
            version: "0".into(),
            kind: "gibbs".into(),
            config: Value::Null,
            seeds: BTreeMap::new(),
            outputs: vec![],
            results: Value::Null,
            warnings: vec![],
            verdicts: vec![Verdict::check("a", true, ""), Verdict::skipped("b", "")],
        };
        assert!(m.passed());
    }
}
