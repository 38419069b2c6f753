//! CSV, SVG and manifest writers. All output is deterministic: floats in CSV
//! use the shortest round-trip form, SVG coordinates use 9 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bands::{BandRegime, ConfidenceBand};
use crate::error::{Error, Result};
use crate::plotsets::{PlotKind, PlotSet};

pub fn plot_csv(plot: &PlotSet) -> String {
    let mut s = String::from("x,y\n");
    for &(x, y) in &plot.points {
        let _ = writeln!(s, "{x},{y}");
    }
    s
}

pub fn band_csv(band: &ConfidenceBand) -> String {
    let mut s = String::from("x,y,xlo,xhi,ylo,yhi\n");
    for c in &band.cells {
        let _ = writeln!(s, "{},{},{},{},{},{}", c.x, c.y, c.xlo, c.xhi, c.ylo, c.yhi);
    }
    s
}

/// Pretty JSON with a trailing newline; struct fields keep declaration order.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `v` rounded to 9 significant digits.
pub fn sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return "0".into();
    }
    let r: f64 = format!("{v:.8e}").parse().unwrap_or(v);
    format!("{r}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: String,
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(argv: Vec<String>, seed: Option<u64>) -> Self {
        Self {
            command_line: argv.join(" "),
            argv,
            seed,
            version: format!("tailband {}", env!("CARGO_PKG_VERSION")),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.insert(path.display().to_string(), sha256_hex(bytes));
    }

    pub fn add_output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.insert(path.display().to_string(), sha256_hex(bytes));
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

pub fn parse_manifest(text: &str) -> Result<RunManifest> {
    serde_json::from_str(text).map_err(|e| Error::ParseError { line: e.line(), message: e.to_string() })
}

/// Write `bytes` to `path` and record it in `manifest`.
pub fn write_recorded(manifest: &mut RunManifest, path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes)?;
    manifest.add_output(path, bytes);
    Ok(())
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;
const SHADES: [&str; 3] = ["#c6dbef", "#9ecae1", "#6baed6"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> String {
        sig9(MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN))
    }

    fn py(&self, y: f64) -> String {
        sig9(HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN))
    }
}

fn frame(plot: &PlotSet, bands: &[ConfidenceBand]) -> Frame {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &plot.points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    for c in bands.iter().flat_map(|b| &b.cells) {
        x0 = x0.min(c.xlo);
        x1 = x1.max(c.xhi);
        y0 = y0.min(c.ylo);
        y1 = y1.max(c.yhi);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    Frame { x0, x1, y0, y1 }
}

/// SVG 1.1 rendering of a plot, optional nested bands (widest first) and the
/// reference line `y = slope x`.
pub fn render_svg(plot: &PlotSet, bands: &[ConfidenceBand], slope: Option<f64>) -> String {
    let f = frame(plot, bands);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    for (i, band) in bands.iter().enumerate() {
        let shade = SHADES[(i + SHADES.len() - bands.len().min(SHADES.len())) % SHADES.len()];
        let _ = writeln!(s, r#"<g fill="{shade}" stroke="none" data-level="{}">"#, sig9(band.level));
        if band.regime == BandRegime::Qq {
            let mut pts: Vec<String> = band.cells.iter().map(|c| format!("{},{}", f.px(c.x), f.py(c.yhi))).collect();
            pts.extend(band.cells.iter().rev().map(|c| format!("{},{}", f.px(c.x), f.py(c.ylo))));
            let _ = writeln!(s, r#"<polygon points="{}"/>"#, pts.join(" "));
        } else {
            for c in &band.cells {
                let (x, y) = (f.px(c.xlo), f.py(c.yhi));
                let w = sig9((c.xhi - c.xlo) / (f.x1 - f.x0) * (WIDTH - 2.0 * MARGIN));
                let h = sig9((c.yhi - c.ylo) / (f.y1 - f.y0) * (HEIGHT - 2.0 * MARGIN));
                let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{w}" height="{h}"/>"#);
            }
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    if let Some(a) = slope {
        let (xa, xb) = plot.x_range();
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="red" stroke-width="1.5"/>"#,
            f.px(xa),
            f.py(a * xa),
            f.px(xb),
            f.py(a * xb)
        );
    }
    let _ = writeln!(s, r#"<g fill="black">"#);
    for &(x, y) in &plot.points {
        let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="1.2"/>"#, f.px(x), f.py(y));
    }
    let _ = writeln!(s, "</g>");
    let title = match plot.kind {
        PlotKind::Qq | PlotKind::QqNormalized => "QQ plot",
        PlotKind::Hill => "Hill plot",
        PlotKind::Pickands => "Pickands plot",
        _ => "Mean excess plot",
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{title}</text>"#,
        WIDTH / 2.0,
        MARGIN / 2.0 + 5.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="10">x: {} to {}, y: {} to {}</text>"#,
        HEIGHT - MARGIN / 3.0,
        sig9(f.x0),
        sig9(f.x1),
        sig9(f.y0),
        sig9(f.y1)
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_rounds() {
        assert_eq!(sig9(0.1234567891234), "0.123456789");
        assert_eq!(sig9(123456789012.0), "123456789000");
        assert_eq!(sig9(2.5), "2.5");
    }

    #[test]
    fn sha_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
