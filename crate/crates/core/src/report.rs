//! CSV, JSON and SVG emission for scan datasets. Output is deterministic:
//! fixed float formatting, input order preserved.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{FidelitySweep, OverlayScan, PetScan, PhaseScan, TomographyScan};
use crate::effective::PauliCoefficients;
use crate::gatesim::{FidelityReport, FIDELITY_HEADER};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(Error::Parse(format!("unknown format `{other}`"))),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

/// Pauli coefficients from one source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliRow {
    pub string: String,
    pub alpha: f64,
    /// `exact`, `pert2` or `pert3`.
    pub path: String,
}

pub fn pauli_rows(pc: &PauliCoefficients, max_weight: usize, path: &str) -> Vec<PauliRow> {
    pc.strings(max_weight)
        .into_iter()
        .map(|(p, a)| PauliRow {
            string: p.to_string(),
            alpha: a,
            path: path.to_string(),
        })
        .collect()
}

/// Everything `report render` understands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dataset {
    Pauli { rows: Vec<PauliRow> },
    Tomography(TomographyScan),
    Pet(PetScan),
    Overlay(OverlayScan),
    Phase(PhaseScan),
    Fidelity(FidelitySweep),
}

impl Dataset {
    pub fn name(&self) -> &'static str {
        match self {
            Dataset::Pauli { .. } => "pauli",
            Dataset::Tomography(_) => "tomography",
            Dataset::Pet(_) => "pet",
            Dataset::Overlay(_) => "overlay",
            Dataset::Phase(_) => "phase",
            Dataset::Fidelity(_) => "fidelity",
        }
    }

    /// Number of flagged (failed) points.
    pub fn flagged(&self) -> usize {
        match self {
            Dataset::Pauli { .. } => 0,
            Dataset::Tomography(t) => t.flags.len(),
            Dataset::Pet(p) => p.rows.iter().map(|r| r.flags.len()).sum(),
            Dataset::Overlay(o) => o.flags.len(),
            Dataset::Phase(p) => p.points.iter().filter(|x| x.flag.is_some()).count(),
            Dataset::Fidelity(f) => f.flags.len(),
        }
    }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.9e}")
    } else {
        String::new()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), num)
}

/// Header and records of a dataset's CSV.
pub fn csv_table(d: &Dataset) -> (Vec<&'static str>, Vec<Vec<String>>) {
    match d {
        Dataset::Pauli { rows } => (
            vec!["string", "alpha_MHz", "path"],
            rows.iter().map(|r| vec![r.string.clone(), num(r.alpha), r.path.clone()]).collect(),
        ),
        Dataset::Tomography(t) => {
            let mut out = Vec::new();
            for r in &t.rows {
                let base = |path: &str, v: String| {
                    vec![t.cell.clone(), num(r.j_target), num(r.g_side), num(r.j13), r.string.clone(), v, path.to_string()]
                };
                out.push(base("exact", num(r.exact)));
                out.push(base("pert2", opt(r.pert2)));
                out.push(base("pert3", opt(r.pert3)));
            }
            (vec!["cell", "j_target_MHz", "gside_MHz", "j13_MHz", "string", "alpha_MHz", "path"], out)
        }
        Dataset::Pet(p) => (
            vec!["cell", "x_value", "j13_MHz", "zz_max_MHz", "zzz_max_MHz", "ratio"],
            p.rows
                .iter()
                .flat_map(|r| {
                    r.points.iter().map(move |pt| {
                        vec![
                            r.cell.clone(),
                            num(pt.x),
                            num(pt.j13),
                            num(pt.maxima.zz_max),
                            num(pt.maxima.zzz_max),
                            num(pt.ratio()),
                        ]
                    })
                })
                .collect(),
        ),
        Dataset::Overlay(o) => (
            vec!["cell", "gside_MHz", "j_target_MHz", "j13_MHz", "z1z3_MHz", "z1z2z3_MHz", "z1z3z4_MHz", "z1z3z5_MHz"],
            o.points
                .iter()
                .map(|p| {
                    vec![
                        p.cell.clone(),
                        num(o.g_side),
                        num(p.j_target),
                        num(p.j13),
                        num(p.stray.zz13),
                        num(p.stray.zzz123),
                        num(p.stray.zzz134),
                        num(p.stray.zzz135),
                    ]
                })
                .collect(),
        ),
        Dataset::Phase(p) => (
            vec!["ratio", "zz_max_MHz", "zzz_max_MHz", "dominant_zz_string", "dominant_zzz_string"],
            p.points
                .iter()
                .map(|pt| match &pt.maxima {
                    Some(m) => vec![num(pt.ratio), num(m.zz_max), num(m.zzz_max), m.zz_string.clone(), m.zzz_string.clone()],
                    None => vec![num(pt.ratio), String::new(), String::new(), String::new(), String::new()],
                })
                .collect(),
        ),
        Dataset::Fidelity(f) => (FIDELITY_HEADER.to_vec(), fidelity_records(&f.reports)),
    }
}

fn fidelity_records(reports: &[FidelityReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .flat_map(|r| {
            r.errors.iter().map(move |(level, e)| {
                vec![
                    r.cell.clone(),
                    num(r.g_side),
                    level.to_string(),
                    num(r.j_on.abs()),
                    num(*e),
                    num(r.pulse.duration()),
                ]
            })
        })
        .collect()
}

pub fn write_csv(d: &Dataset, path: &Path) -> Result<()> {
    let (header, rows) = csv_table(d);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_json(d: &Dataset, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(d)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

// ----------------------------------------------------------------------- SVG

const W: f64 = 640.0;
const H: f64 = 400.0;
const M: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Svg {
    body: String,
}

impl Svg {
    fn new(width: f64, height: f64, title: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
        );
        let _ = writeln!(body, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(body, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#, width / 2.0, escape(title));
        Self { body }
    }

    fn line(&mut self, pts: &[(f64, f64)], color: &str, label: &str) {
        if pts.is_empty() {
            return;
        }
        let d: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline class="series" data-label="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            escape(label),
            d.join(" ")
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, class: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect class="{class}" x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, s: &str, anchor: &str) {
        let _ = writeln!(self.body, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="10">{}</text>"#, escape(s));
    }

    fn axes(&mut self, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            self.body,
            r#"<path d="M{M:.0},{M:.0} V{:.0} H{:.0}" stroke="black" fill="none"/>"#,
            H - M,
            W - M
        );
        self.text(W / 2.0, H - 10.0, xlabel, "middle");
        self.text(12.0, H / 2.0, ylabel, "start");
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Linear map of `[lo, hi]` onto `[a, b]`; degenerate ranges map to the middle.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        0.5 * (a + b)
    }
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Line chart of several named series.
fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut svg = Svg::new(W, H, title);
    svg.axes(xlabel, ylabel);
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.1.iter().map(|p| p.1)));
    for (k, (name, pts)) in series.iter().enumerate() {
        let mapped: Vec<(f64, f64)> = pts
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| (scale(x, x0, x1, M, W - M), scale(y, y0, y1, H - M, M)))
            .collect();
        svg.line(&mapped, PALETTE[k % PALETTE.len()], name);
        svg.text(W - M + 4.0, M + 12.0 * k as f64, name, "start");
    }
    svg.finish()
}

fn log10_or_nan(v: f64) -> f64 {
    if v > 0.0 {
        v.log10()
    } else {
        f64::NAN
    }
}

/// Heat colour for `t` in `[0, 1]`.
fn heat(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

fn pet_svg(p: &PetScan) -> String {
    let rows = p.rows.len().max(1) as f64;
    let band = ((H - 2.0 * M) / rows).max(4.0);
    let height = 2.0 * M + band * rows;
    let mut svg = Svg::new(W, height, &format!("PET, G_side = {} MHz", p.g_side));
    let (z0, z1) = bounds(p.rows.iter().flat_map(|r| r.points.iter().map(|pt| log10_or_nan(pt.maxima.zz_max))));
    for (i, row) in p.rows.iter().enumerate() {
        let y = M + band * i as f64;
        svg.text(M - 4.0, y + 0.7 * band, &row.cell, "end");
        let n = row.points.len().max(1) as f64;
        let cw = (W - 2.0 * M) / n;
        let rmax = row.max_ratio().max(1.0);
        let mut line = Vec::new();
        for (k, pt) in row.points.iter().enumerate() {
            let x = M + cw * k as f64;
            let t = scale(log10_or_nan(pt.maxima.zz_max), z0, z1, 0.0, 1.0);
            svg.rect(x, y, cw, band, &heat(if t.is_finite() { t } else { 0.0 }), "cell-band");
            line.push((x + 0.5 * cw, y + band - band * (pt.ratio() / rmax).min(1.0)));
        }
        svg.line(&line, "black", &format!("{} ratio", row.cell));
    }
    svg.finish()
}

fn bar_chart(title: &str, bars: &[(String, f64)]) -> String {
    let mut svg = Svg::new(W, H, title);
    svg.axes("string", "|alpha| (MHz)");
    let top = bars.iter().map(|b| b.1.abs()).fold(0.0, f64::max);
    let n = bars.len().max(1) as f64;
    let bw = (W - 2.0 * M) / n;
    for (k, (name, v)) in bars.iter().enumerate() {
        let h = if top > 0.0 { (H - 2.0 * M) * v.abs() / top } else { 0.0 };
        let x = M + bw * k as f64;
        svg.rect(x + 0.1 * bw, H - M - h, 0.8 * bw, h, PALETTE[usize::from(*v < 0.0)], "bar");
        if bars.len() <= 40 {
            svg.text(x + 0.5 * bw, H - M + 12.0, name, "middle");
        }
    }
    svg.finish()
}

pub fn svg(d: &Dataset) -> String {
    match d {
        Dataset::Pauli { rows } => {
            let bars: Vec<(String, f64)> = rows.iter().map(|r| (format!("{} {}", r.string, r.path), r.alpha)).collect();
            bar_chart("Pauli coefficients", &bars)
        }
        Dataset::Tomography(t) => {
            let bars: Vec<(String, f64)> = t.rows.iter().map(|r| (r.string.clone(), r.exact)).collect();
            bar_chart(&format!("Tomography, cell {}", t.cell), &bars)
        }
        Dataset::Pet(p) => pet_svg(p),
        Dataset::Overlay(o) => {
            let mut series = Vec::new();
            let mut cells: Vec<&str> = o.points.iter().map(|p| p.cell.as_str()).collect();
            cells.dedup();
            for c in cells {
                let pts: Vec<&_> = o.points.iter().filter(|p| p.cell == c).collect();
                let names = ["Z1Z3", "Z1Z2Z3", "Z1Z3Z4", "Z1Z3Z5"];
                for (k, name) in names.iter().enumerate() {
                    let xy = pts
                        .iter()
                        .map(|p| {
                            let s = [p.stray.zz13, p.stray.zzz123, p.stray.zzz134, p.stray.zzz135];
                            (p.j13.abs(), log10_or_nan(s[k].abs()))
                        })
                        .collect();
                    series.push((format!("{c} {name}"), xy));
                }
            }
            line_chart(&format!("Overlay, G_side = {} MHz", o.g_side), "|J13| (MHz)", "log10 |alpha|", &series)
        }
        Dataset::Phase(p) => {
            let pick = |f: &dyn Fn(&crate::analysis::CellMaxima) -> f64| -> Vec<(f64, f64)> {
                p.points
                    .iter()
                    .filter_map(|pt| pt.maxima.as_ref().map(|m| (pt.ratio.log10(), log10_or_nan(f(m)))))
                    .collect()
            };
            let series = vec![("|ZZ|max".to_string(), pick(&|m| m.zz_max)), ("|ZZZ|max".to_string(), pick(&|m| m.zzz_max))];
            line_chart(
                &format!("{} state, G_radial = {} MHz", p.state, p.g_radial),
                "log10 G_side/G_radial",
                "log10 MHz",
                &series,
            )
        }
        Dataset::Fidelity(f) => {
            let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
            for r in &f.reports {
                for (level, e) in &r.errors {
                    let name = level.to_string();
                    let pt = (r.g_side, log10_or_nan(*e));
                    match series.iter_mut().find(|s| s.0 == name) {
                        Some(s) => s.1.push(pt),
                        None => series.push((name, vec![pt])),
                    }
                }
            }
            for s in &mut series {
                s.1.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
            line_chart("iSWAP error", "G_side (MHz)", "log10 error", &series)
        }
    }
}

/// Writes `dataset` as `<out_dir>/<stem>.<ext>`.
pub fn report_render(d: &Dataset, format: Format, out_dir: &Path, stem: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(format!("{stem}.{}", format.extension()));
    match format {
        Format::Csv => write_csv(d, &path)?,
        Format::Json => write_json(d, &path)?,
        Format::Svg => std::fs::write(&path, svg(d)).map_err(|e| Error::io(&path, e))?,
    }
    Ok(path)
}
