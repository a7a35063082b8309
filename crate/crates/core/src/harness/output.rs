//! CSV and SVG emitters. The CSV is the canonical artifact; the SVG is drawn
//! from the same table.

use std::fmt::Write as _;
use std::path::Path;

use super::scenario::Spacing;
use super::sweep::SweepResult;
use crate::error::{Error, Result};

pub const UNSTABLE_MARKER: &str = "unstable";
pub const ERROR_MARKER: &str = "error";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(f64),
    Unstable,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub axis: f64,
    pub values: Vec<Cell>,
    pub spectral_abscissa: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub labels: Vec<String>,
    pub rows: Vec<CsvRow>,
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

impl CsvTable {
    pub fn from_result(result: &SweepResult) -> Self {
        let n = result.observables.len();
        let rows = result
            .rows
            .iter()
            .map(|r| CsvRow {
                axis: r.axis,
                values: match &r.entanglement {
                    Some(e) => e.iter().map(|&v| Cell::Value(v)).collect(),
                    None if !r.stable && r.error.is_none() => vec![Cell::Unstable; n],
                    None => vec![Cell::Error; n],
                },
                spectral_abscissa: r.spectral_abscissa,
                stable: r.stable,
            })
            .collect();
        Self {
            labels: result.observables.iter().map(|o| o.label.clone()).collect(),
            rows,
        }
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["axis".to_string()];
        h.extend(self.labels.iter().cloned());
        h.push("spectral_abscissa".into());
        h.push("stable".into());
        h
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header()).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![format_number(r.axis)];
            rec.extend(r.values.iter().map(|c| match c {
                Cell::Value(v) => format_number(*v),
                Cell::Unstable => UNSTABLE_MARKER.into(),
                Cell::Error => ERROR_MARKER.into(),
            }));
            rec.push(format_number(r.spectral_abscissa));
            rec.push(r.stable.to_string());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = rd
            .headers()
            .map_err(|e| e.to_string())?
            .iter()
            .map(str::to_string)
            .collect();
        let k = header.len();
        if k < 3
            || header[0] != "axis"
            || header[k - 2] != "spectral_abscissa"
            || header[k - 1] != "stable"
        {
            return Err(format!("unexpected header {header:?}"));
        }
        let labels = header[1..k - 2].to_vec();
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            if rec.len() != k {
                return Err(format!("row {} has {} fields, expected {k}", i + 1, rec.len()));
            }
            let values = (1..k - 2)
                .map(|j| match &rec[j] {
                    UNSTABLE_MARKER => Ok(Cell::Unstable),
                    ERROR_MARKER => Ok(Cell::Error),
                    s => parse_number(s).map(Cell::Value),
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let stable = match &rec[k - 1] {
                "true" => true,
                "false" => false,
                s => return Err(format!("`{s}` is not a boolean")),
            };
            rows.push(CsvRow {
                axis: parse_number(&rec[0])?,
                values,
                spectral_abscissa: parse_number(&rec[k - 2])?,
                stable,
            });
        }
        Ok(Self { labels, rows })
    }
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, CsvTable::from_result(result).to_csv_string()).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    CsvTable::parse(&text).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of every observable against the axis. Unstable or failed
/// points break the line.
pub fn render_svg(table: &CsvTable, axis_name: &str, spacing: Spacing) -> String {
    let (w, h) = (800.0, 500.0);
    let (left, right, top, bottom) = (70.0, 190.0, 30.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let fx = |x: f64| match spacing {
        Spacing::Linear => x,
        Spacing::Logarithmic => x.log10(),
    };
    let xs: Vec<f64> = table.rows.iter().map(|r| fx(r.axis)).collect();
    let (xmin, xmax) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (xmin, xmax) = if xmin < xmax { (xmin, xmax) } else { (xmin - 1.0, xmin + 1.0) };
    let ymax = table
        .rows
        .iter()
        .flat_map(|r| r.values.iter())
        .filter_map(|c| match c {
            Cell::Value(v) if v.is_finite() => Some(*v),
            _ => None,
        })
        .fold(0.0_f64, f64::max);
    let ymax = if ymax > 0.0 { ymax * 1.05 } else { 1.0 };
    let px = |x: f64| left + (x - xmin) / (xmax - xmin) * pw;
    let py = |y: f64| top + ph - y / ymax * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (xv, yv) = (xmin + t * (xmax - xmin), t * ymax);
        let xlabel = match spacing {
            Spacing::Linear => format!("{xv:.3}"),
            Spacing::Logarithmic => format!("{:.3e}", 10f64.powf(xv)),
        };
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xlabel}</text>"#, px(xv), top + ph + 18.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3}</text>"#, left - 6.0, py(yv) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 15.0, escape(axis_name));
    let _ = writeln!(s, r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">E_N</text>"#, top + ph / 2.0, top + ph / 2.0);

    for (j, label) in table.labels.iter().enumerate() {
        let color = PALETTE[j % PALETTE.len()];
        let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for (r, &x) in table.rows.iter().zip(&xs) {
            match r.values[j] {
                Cell::Value(v) if v.is_finite() => segments.last_mut().unwrap().push((px(x), py(v))),
                _ => segments.push(Vec::new()),
            }
        }
        for seg in segments.iter().filter(|s| !s.is_empty()) {
            let pts: Vec<String> = seg.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        }
        let ly = top + 10.0 + 18.0 * j as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}">{}</text>"#, lx + 26.0, ly + 4.0, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg_plot(result: &SweepResult, path: &Path) -> Result<()> {
    let table = CsvTable::from_result(result);
    let svg = render_svg(&table, &result.axis.name, result.axis.spacing);
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
