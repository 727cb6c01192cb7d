//! CSV, JSON and SVG output for sweeps and threshold estimates.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::bsm::{Convention, Protocol};
use crate::error::{Error, Result};
use crate::gsm::Architecture;
use crate::presets::reference_threshold;
use crate::threshold::{params_key, SweepConfig, ThresholdCurve, ThresholdRun};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_HEADER: &str =
    "architecture,protocol,n,m,j,convention,d,eta,ler,ci_low,ci_high,samples,seed";

/// Decimal rendering with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// `x` rounded to six significant digits.
pub fn round6(x: f64) -> f64 {
    sig6(x).parse().unwrap_or(x)
}

/// Leading comment line and column header.
pub fn csv_preamble() -> String {
    format!("# gsm-threshold {VERSION}\n{CSV_HEADER}\n")
}

/// Data rows for one sweep, without preamble.
pub fn csv_rows(config: &SweepConfig, curves: &[ThresholdCurve]) -> String {
    let mut out = String::new();
    for curve in curves {
        for p in &curve.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                config.architecture,
                config.protocol,
                config.n,
                config.m,
                config.j,
                config.convention,
                curve.distance,
                sig6(p.eta),
                sig6(p.rate),
                sig6(p.ci_low),
                sig6(p.ci_high),
                p.samples,
                config.seed
            );
        }
    }
    out
}

/// Complete CSV document for one sweep. An empty sweep yields only the
/// preamble.
pub fn curves_csv(config: &SweepConfig, curves: &[ThresholdCurve]) -> String {
    let mut out = csv_preamble();
    out.push_str(&csv_rows(config, curves));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEntry {
    pub n: u32,
    pub m: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<u32>,
    pub photons_per_resource_state: u32,
    pub eta_c: f64,
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub distances: Vec<u32>,
    pub samples: u64,
    pub grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdFamily {
    pub architecture: Architecture,
    pub protocol: Protocol,
    pub convention: Convention,
    /// Keyed by `"n,m"` or `"n,m,j"`.
    pub thresholds: BTreeMap<String, ThresholdEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSummary {
    pub version: String,
    pub seed: u64,
    pub families: Vec<ThresholdFamily>,
}

impl ThresholdSummary {
    pub fn from_runs(runs: &[ThresholdRun]) -> Self {
        let mut families: Vec<ThresholdFamily> = Vec::new();
        for run in runs {
            let c = &run.config;
            let idx = match families.iter().position(|f| {
                (f.architecture, f.protocol, f.convention)
                    == (c.architecture, c.protocol, c.convention)
            }) {
                Some(i) => i,
                None => {
                    families.push(ThresholdFamily {
                        architecture: c.architecture,
                        protocol: c.protocol,
                        convention: c.convention,
                        thresholds: BTreeMap::new(),
                    });
                    families.len() - 1
                }
            };
            let e = &run.estimate;
            families[idx].thresholds.insert(
                params_key(c.protocol, c.n, c.m, c.j),
                ThresholdEntry {
                    n: c.n,
                    m: c.m,
                    j: (c.protocol == Protocol::Active).then_some(c.j),
                    photons_per_resource_state: c.architecture.photons_per_resource_state(c.n, c.m),
                    eta_c: round6(e.eta_c),
                    std_err: round6(e.std_err),
                    ci_low: round6(e.ci_low),
                    ci_high: round6(e.ci_high),
                    distances: c.distances.clone(),
                    samples: c.samples,
                    grid: c.etas.iter().map(|&x| round6(x)).collect(),
                    reference: reference_threshold(c.architecture, c.protocol, c.n, c.m, c.j),
                },
            );
        }
        ThresholdSummary {
            version: VERSION.to_string(),
            seed: runs.first().map_or(0, |r| r.config.seed),
            families,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary is always serialisable")
    }

    pub fn len(&self) -> usize {
        self.families.iter().map(|f| f.thresholds.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];
const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: [f64; 4] = [60.0, 20.0, 30.0, 50.0]; // left, right, top, bottom

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(mut x: (f64, f64), mut y: (f64, f64)) -> Self {
        if x.1 <= x.0 {
            x = (x.0 - 0.5, x.0 + 0.5);
        }
        if y.1 <= y.0 {
            y = (y.0 - 0.5, y.0 + 0.5);
        }
        Frame { x, y }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN[0] + (x - self.x.0) / (self.x.1 - self.x.0) * (W - MARGIN[0] - MARGIN[1])
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN[3] - (y - self.y.0) / (self.y.1 - self.y.0) * (H - MARGIN[2] - MARGIN[3])
    }

    fn axes(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
            W / 2.0,
            escape(title)
        );
        let (x0, x1, y0, y1) = (MARGIN[0], W - MARGIN[1], H - MARGIN[3], MARGIN[2]);
        let _ = writeln!(
            out,
            r#"<path d="M{x0},{y1} V{y0} H{x1}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = self.x.0 + t * (self.x.1 - self.x.0);
            let yv = self.y.0 + t * (self.y.1 - self.y.0);
            let (px, py) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                out,
                r#"<line x1="{px:.1}" y1="{y0}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                y0 + 4.0,
                y0 + 16.0,
                tick(xv)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{:.1}" y1="{py:.1}" x2="{x0}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                x0 - 4.0,
                x0 - 6.0,
                py + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            H - 12.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// Logical error rate against loss rate, one polyline per distance, with
/// an optional vertical marker at the estimated threshold.
pub fn curves_svg(title: &str, curves: &[ThresholdCurve], threshold: Option<f64>) -> String {
    let points = || curves.iter().flat_map(|c| c.points.iter());
    let (xs, ys) = if points().next().is_none() {
        ((0.0, 1.0), (0.0, 1.0))
    } else {
        (
            bounds(points().map(|p| p.eta)),
            (0.0, bounds(points().map(|p| p.rate)).1.max(1e-3)),
        )
    };
    let frame = Frame::new(xs, ys);
    let mut out = String::new();
    frame.axes(&mut out, title, "physical loss rate", "logical error rate");
    for (i, curve) in curves.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = curve
            .points
            .iter()
            .map(|p| format!("{:.1},{:.1}", frame.px(p.eta), frame.py(p.rate)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        for p in &curve.points {
            let _ = writeln!(
                out,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="{colour}"/>"#,
                frame.py(p.ci_low),
                frame.py(p.ci_high),
                x = frame.px(p.eta)
            );
        }
        let ly = MARGIN[2] + 14.0 * (i as f64 + 1.0);
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">d = {}</text>"#,
            MARGIN[0] + 28.0,
            MARGIN[0] + 32.0,
            ly + 4.0,
            curve.distance,
            lx = MARGIN[0] + 10.0
        );
    }
    if let Some(t) = threshold.filter(|t| *t >= frame.x.0 && *t <= frame.x.1) {
        let x = frame.px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="gray" stroke-dasharray="4 3"/>"#,
            MARGIN[2],
            H - MARGIN[3]
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Threshold against photons per resource state, one marker per scheme.
pub fn photons_svg(title: &str, summary: &ThresholdSummary) -> String {
    let entries: Vec<(usize, &ThresholdEntry)> = summary
        .families
        .iter()
        .enumerate()
        .flat_map(|(i, f)| f.thresholds.values().map(move |e| (i, e)))
        .collect();
    let (xs, ys) = if entries.is_empty() {
        ((0.0, 1.0), (0.0, 1.0))
    } else {
        let xs = bounds(
            entries
                .iter()
                .map(|(_, e)| f64::from(e.photons_per_resource_state)),
        );
        let ys = bounds(entries.iter().flat_map(|(_, e)| [e.ci_low, e.ci_high]));
        ((0.0, xs.1 * 1.05), (0.0, ys.1 * 1.1))
    };
    let frame = Frame::new(xs, ys);
    let mut out = String::new();
    frame.axes(
        &mut out,
        title,
        "photons per resource state",
        "loss threshold",
    );
    for (i, family) in summary.families.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let ly = MARGIN[2] + 14.0 * (i as f64 + 1.0);
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{ly}" r="3" fill="{colour}"/><text x="{}" y="{}">{} {}</text>"#,
            MARGIN[0] + 14.0,
            MARGIN[0] + 22.0,
            ly + 4.0,
            family.architecture,
            family.protocol
        );
    }
    for (i, e) in entries {
        let colour = PALETTE[i % PALETTE.len()];
        let x = frame.px(f64::from(e.photons_per_resource_state));
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="{colour}"/><circle cx="{x:.1}" cy="{:.1}" r="3" fill="{colour}"/>"#,
            frame.py(e.ci_low),
            frame.py(e.ci_high),
            frame.py(e.eta_c)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
