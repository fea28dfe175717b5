//! Standalone SVG plots for trace, sweep and window CSV files.
//!
//! Output is a pure function of the input text, so identical CSVs give
//! byte-identical SVGs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;

use crate::output::write_text;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Trace,
    Sweep,
    Window,
}

impl PlotKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Trace => "trace",
            Self::Sweep => "sweep",
            Self::Window => "window",
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const RESPONSE_POINTS: usize = 1024;
/// Smallest magnitude drawn on the window plot's log axis.
const MAGNITUDE_FLOOR: f64 = 1e-16;

/// A CSV file split into its `# key=value` metadata and its numeric columns.
#[derive(Debug)]
pub struct ParsedCsv {
    pub meta: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedCsv {
    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        let mut body = String::new();
        for line in text.lines() {
            if let Some(c) = line.strip_prefix('#') {
                for tok in c.split_whitespace() {
                    if let Some((k, v)) = tok.split_once('=') {
                        meta.insert(k.to_string(), v.to_string());
                    }
                }
            } else if !line.trim().is_empty() {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut rdr = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let header = rdr.headers().context("reading CSV header")?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec.context("malformed CSV row")?.iter().map(str::to_string).collect());
        }
        Ok(Self { meta, header, rows })
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("missing column `{name}`"))
    }

    /// Values of a column; empty cells come back as `None`.
    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let i = self.index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let cell = row.get(i).map(|s| s.trim()).unwrap_or("");
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>()
                        .map(Some)
                        .with_context(|| format!("row {}: `{cell}` is not a number", r + 1))
                }
            })
            .collect()
    }

    fn required(&self, name: &str) -> Result<Vec<f64>> {
        self.column(name)?
            .into_iter()
            .enumerate()
            .map(|(r, v)| v.ok_or_else(|| anyhow!("row {}: empty `{name}`", r + 1)))
            .collect()
    }

    fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta.get(key).and_then(|v| v.parse().ok())
    }
}

#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Result<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            bail!("no plottable values");
        }
        if hi - lo < 1e-12 {
            let pad = if log { 0.5 } else { lo.abs().max(1.0) * 0.05 };
            lo -= pad;
            hi += pad;
        } else if log {
            lo = lo.floor();
            hi = hi.ceil();
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Ok(Self { lo, hi, log })
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.max(f64::MIN_POSITIVE).log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            let step = ((b - a) / 8 + 1).max(1);
            return (a..=b)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect();
        }
        let raw = (self.hi - self.lo) / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let mut out = Vec::new();
        let mut t = (self.lo / step).ceil() * step;
        while t <= self.hi + 1e-9 * step {
            let t0 = if t.abs() < 1e-12 * step { 0.0 } else { t };
            out.push((t0, tick_label(t0)));
            t += step;
        }
        out
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Canvas {
    x: Axis,
    y: Axis,
    body: String,
}

impl Canvas {
    fn new(x: Axis, y: Axis) -> Self {
        Self { x, y, body: String::new() }
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + self.x.unit(v) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - self.y.unit(v) * (HEIGHT - TOP - BOTTOM)
    }

    fn frame(&mut self, title: &str, xlabel: &str, ylabel: &str) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(
            self.body,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
            x1 - x0,
            y1 - y0
        );
        for (v, label) in self.x.ticks() {
            let p = self.px(v);
            let _ = writeln!(
                self.body,
                r##"<line x1="{p:.2}" y1="{y1:.2}" x2="{p:.2}" y2="{:.2}" stroke="#333"/><text x="{p:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                y1 + 5.0,
                y1 + 19.0,
                esc(&label)
            );
        }
        for (v, label) in self.y.ticks() {
            let p = self.py(v);
            let _ = writeln!(
                self.body,
                r##"<line x1="{:.2}" y1="{p:.2}" x2="{x0:.2}" y2="{p:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                x0 - 5.0,
                x0 - 8.0,
                p + 4.0,
                esc(&label)
            );
        }
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            (x0 + x1) / 2.0,
            esc(title)
        );
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 14.0,
            esc(xlabel)
        );
        let _ = writeln!(
            self.body,
            r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            (y0 + y1) / 2.0,
            esc(ylabel)
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str, dashed: bool) {
        let coords: Vec<String> = pts
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.x.log || *x > 0.0) && (!self.y.log || *y > 0.0))
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        if coords.len() < 2 {
            return;
        }
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            coords.join(" ")
        );
    }

    fn dots(&mut self, pts: &[(f64, f64)], color: &str) {
        for &(x, y) in pts {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#,
                self.px(x),
                self.py(y)
            );
        }
    }

    fn error_bars(&mut self, pts: &[(f64, f64, f64)], color: &str) {
        for &(x, y, e) in pts {
            if e <= 0.0 {
                continue;
            }
            let p = self.px(x);
            let _ = writeln!(
                self.body,
                r#"<line x1="{p:.2}" y1="{:.2}" x2="{p:.2}" y2="{:.2}" stroke="{color}"/>"#,
                self.py(y - e),
                self.py(y + e)
            );
        }
    }

    fn note(&mut self, line: usize, text: &str, color: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
            LEFT + 10.0,
            TOP + 18.0 + 16.0 * line as f64,
            esc(text)
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

fn trace_svg(csv: &ParsedCsv) -> Result<String> {
    let s = csv.required("s")?;
    let f = csv.required("fidelity")?;
    let err = if csv.header.iter().any(|h| h == "stderr") {
        Some(csv.required("stderr")?)
    } else {
        None
    };
    if s.is_empty() {
        bail!("trace has no rows");
    }
    let lo = f.iter().zip(err.iter().flatten().chain(std::iter::repeat(&0.0))).map(|(y, e)| y - e);
    let hi = f.iter().zip(err.iter().flatten().chain(std::iter::repeat(&0.0))).map(|(y, e)| y + e);
    let y = Axis::fit(lo.chain(hi), false)?;
    let x = Axis { lo: 0.0, hi: 1.0, log: false };
    let mut c = Canvas::new(x, y);
    c.frame("Fidelity along the path", "s", "Tr(P(s) rho(s))");
    let pts: Vec<(f64, f64)> = s.iter().copied().zip(f.iter().copied()).collect();
    c.polyline(&pts, "#1f77b4", false);
    if let Some(e) = err {
        let bars: Vec<_> = pts.iter().zip(&e).map(|(&(x, y), &e)| (x, y, e)).collect();
        c.error_bars(&bars, "#1f77b4");
        c.dots(&pts, "#1f77b4");
    }
    Ok(c.finish())
}

fn x_transform(name: &str, x: f64) -> f64 {
    match name {
        "sqrt" => x.sqrt(),
        "log-inverse" => (1.0 / x).ln(),
        "inverse" => 1.0 / x,
        _ => x,
    }
}

fn sweep_svg(csv: &ParsedCsv) -> Result<String> {
    let x_raw = csv.required("x")?;
    let y_name = csv.meta.get("y").cloned().unwrap_or_else(|| "t_schedule".into());
    let y_raw = csv.column(&y_name)?;
    let x_map = csv.meta.get("x_map").cloned().unwrap_or_else(|| "identity".into());
    let log_log = csv.meta.get("log_log").map(|v| v == "true").unwrap_or(true);
    let pts: Vec<(f64, f64)> = x_raw
        .iter()
        .zip(&y_raw)
        .filter_map(|(&x, y)| y.map(|y| (x_transform(&x_map, x), y)))
        .collect();
    if pts.is_empty() {
        bail!("sweep has no successful points");
    }
    let xa = Axis::fit(pts.iter().map(|p| p.0), log_log)?;
    let ya = Axis::fit(pts.iter().map(|p| p.1), log_log)?;
    let mut c = Canvas::new(xa, ya);
    let axis = csv.meta.get("axis").cloned().unwrap_or_else(|| "x".into());
    let xlabel = match x_map.as_str() {
        "identity" => axis.clone(),
        m => format!("{m}({axis})"),
    };
    c.frame(&format!("Sweep over {axis}"), &xlabel, &y_name);
    c.dots(&pts, "#1f77b4");
    if let (Some(slope), Some(icpt)) = (csv.meta_f64("slope"), csv.meta_f64("intercept")) {
        let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
        let line: Vec<(f64, f64)> = (0..=64)
            .map(|i| {
                let t = i as f64 / 64.0;
                if log_log {
                    let lx = x0.ln() + t * (x1.ln() - x0.ln());
                    (lx.exp(), (slope * lx + icpt).exp())
                } else {
                    let x = x0 + t * (x1 - x0);
                    (x, slope * x + icpt)
                }
            })
            .collect();
        c.polyline(&line, "#d62728", true);
        c.note(0, &format!("slope = {slope:.4}"), "#d62728");
        if let Some(r2) = csv.meta_f64("r2") {
            c.note(1, &format!("r2 = {r2:.6}"), "#d62728");
        }
    }
    Ok(c.finish())
}

fn window_svg(csv: &ParsedCsv) -> Result<String> {
    let k = csv.required("k")?;
    let w = csv.required("w")?;
    if k.is_empty() {
        bail!("window has no taps");
    }
    let response = |omega: f64| -> f64 { k.iter().zip(&w).map(|(&k, &w)| w * (k * omega).cos()).sum::<f64>() };
    let pts: Vec<(f64, f64)> = (0..=RESPONSE_POINTS)
        .map(|i| {
            let om = std::f64::consts::PI * i as f64 / RESPONSE_POINTS as f64;
            (om, response(om).abs().max(MAGNITUDE_FLOOR))
        })
        .collect();
    let delta = csv.meta_f64("delta");
    let ripple = csv.meta_f64("epsilon").map(f64::sqrt);
    let x = Axis { lo: 0.0, hi: std::f64::consts::PI, log: false };
    let y = Axis::fit(pts.iter().map(|p| p.1).chain(ripple), true)?;
    let mut c = Canvas::new(x, y);
    let n = csv.meta.get("n").cloned().unwrap_or_else(|| ((k.len() - 1) / 2).to_string());
    c.frame(&format!("Window response, n = {n}"), "omega", "|A(omega)|");
    c.polyline(&pts, "#1f77b4", false);
    if let Some(d) = delta {
        c.polyline(&[(d, 10f64.powf(y.lo)), (d, 10f64.powf(y.hi))], "#2ca02c", true);
        c.note(0, &format!("band edge = {d}"), "#2ca02c");
    }
    if let Some(r) = ripple {
        c.polyline(&[(0.0, r), (std::f64::consts::PI, r)], "#d62728", true);
        c.note(1, &format!("sqrt(eps) = {r:.3e}"), "#d62728");
    }
    Ok(c.finish())
}

/// Renders a CSV produced by this tool as an SVG document.
pub fn render(kind: PlotKind, text: &str) -> Result<String> {
    let csv = ParsedCsv::parse(text)?;
    match kind {
        PlotKind::Trace => trace_svg(&csv),
        PlotKind::Sweep => sweep_svg(&csv),
        PlotKind::Window => window_svg(&csv),
    }
}

/// Reads `input`, renders it and writes `<stem>.svg` into `out_dir`
/// (or next to the input when no directory is given).
pub fn cmd_plot(input: &Path, kind: PlotKind, out_dir: Option<&Path>) -> Result<PathBuf> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let svg = render(kind, &text).with_context(|| format!("plotting {}", input.display()))?;
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| input.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or(kind.name());
    let name = format!("{stem}.svg");
    write_text(&dir, &name, &svg)?;
    Ok(dir.join(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_become_metadata() {
        let csv = ParsedCsv::parse("# axis=q slope=2.5e0\nx,y\n1,2\n3,\n").unwrap();
        assert_eq!(csv.meta["axis"], "q");
        assert_eq!(csv.meta_f64("slope"), Some(2.5));
        assert_eq!(csv.column("y").unwrap(), vec![Some(2.0), None]);
    }

    #[test]
    fn log_ticks_are_decades() {
        let a = Axis::fit([3e-5, 0.7].into_iter(), true).unwrap();
        let t: Vec<String> = a.ticks().into_iter().map(|t| t.1).collect();
        assert_eq!(t, ["1e-5", "1e-4", "1e-3", "1e-2", "1e-1", "1e0"]);
    }

    #[test]
    fn missing_column_is_an_error() {
        assert!(render(PlotKind::Trace, "a,b\n1,2\n").is_err());
        assert!(render(PlotKind::Trace, "s,fidelity\n0,x\n").is_err());
    }
}
