//! Hand-rolled SVG 1.1 line charts: polyline series, mean +/- std bands,
//! horizontal reference lines, optional log y axis. Output is a pure
//! function of the input data with fixed-precision coordinates, so
//! regenerating a figure from the same table is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const ML: f64 = 82.0;
const MR: f64 = 24.0;
const MT: f64 = 44.0;
const MB: f64 = 58.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Optional (x, lo, hi) band drawn behind the line.
    pub band: Option<Vec<(f64, f64, f64)>>,
}

impl Series {
    pub fn line(label: &str, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.to_string(), points, band: None }
    }
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Dashed horizontal reference lines with labels.
    pub hlines: Vec<(f64, String)>,
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Chart {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            log_y: false,
            series: Vec::new(),
            hlines: Vec::new(),
        }
    }

    fn usable_y(&self, y: f64) -> bool {
        y.is_finite() && (!self.log_y || y > 0.0)
    }

    fn ranges(&self) -> ((f64, f64), (f64, f64)) {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if x.is_finite() && self.usable_y(y) {
                    xs.push(x);
                    ys.push(y);
                }
            }
            if let Some(band) = &s.band {
                for &(x, lo, hi) in band {
                    if x.is_finite() && self.usable_y(lo) && self.usable_y(hi) {
                        xs.push(x);
                        ys.push(lo);
                        ys.push(hi);
                    }
                }
            }
        }
        for (y, _) in &self.hlines {
            if self.usable_y(*y) {
                ys.push(*y);
            }
        }
        let span = |v: &[f64], fallback: (f64, f64)| -> (f64, f64) {
            if v.is_empty() {
                return fallback;
            }
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        };
        let (x0, x1) = span(&xs, (0.0, 1.0));
        let (y0, y1) = span(&ys, if self.log_y { (0.1, 10.0) } else { (0.0, 1.0) });
        ((x0, x1), (y0, y1))
    }
}

struct Mapper {
    x0: f64,
    x1: f64,
    ty0: f64,
    ty1: f64,
    log_y: bool,
}

impl Mapper {
    fn new(chart: &Chart) -> Self {
        let ((mut x0, mut x1), (y0, y1)) = chart.ranges();
        if x1 - x0 < 1e-300 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        let (mut ty0, mut ty1) = if chart.log_y { (y0.log10(), y1.log10()) } else { (y0, y1) };
        if ty1 - ty0 < 1e-300 {
            ty0 -= if chart.log_y { 1.0 } else { 0.5 };
            ty1 += if chart.log_y { 1.0 } else { 0.5 };
        }
        // 5% headroom so curves never sit on the frame.
        let pad = 0.05 * (ty1 - ty0);
        Mapper { x0, x1, ty0: ty0 - pad, ty1: ty1 + pad, log_y: chart.log_y }
    }

    fn fx(&self, x: f64) -> f64 {
        ML + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - ML - MR)
    }

    fn fy(&self, y: f64) -> f64 {
        let t = if self.log_y { y.log10() } else { y };
        MT + (1.0 - (t - self.ty0) / (self.ty1 - self.ty0)) * (HEIGHT - MT - MB)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (0.01..9999.5).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn x_ticks(m: &Mapper) -> Vec<f64> {
    let n = 6;
    (0..n).map(|i| m.x0 + (m.x1 - m.x0) * i as f64 / (n - 1) as f64).collect()
}

/// Linear: evenly spaced. Log: decade marks, thinned to at most ten.
fn y_ticks(m: &Mapper) -> Vec<(f64, String)> {
    if m.log_y {
        let lo = m.ty0.ceil() as i64;
        let hi = m.ty1.floor() as i64;
        if lo > hi {
            return [m.ty0, m.ty1]
                .iter()
                .map(|t| (*t, format!("1e{t:.1}")))
                .collect();
        }
        let count = (hi - lo + 1) as usize;
        let stride = count.div_ceil(10).max(1) as i64;
        (lo..=hi)
            .step_by(stride as usize)
            .map(|e| (e as f64, format!("1e{e}")))
            .collect()
    } else {
        let n = 6;
        (0..n)
            .map(|i| {
                let t = m.ty0 + (m.ty1 - m.ty0) * i as f64 / (n - 1) as f64;
                (t, fmt_tick(t))
            })
            .collect()
    }
}

impl Chart {
    pub fn render(&self) -> String {
        let m = Mapper::new(self);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" font-family="monospace" font-size="15" text-anchor="middle">{}</text>"#,
            (ML + WIDTH - MR) / 2.0,
            esc(&self.title)
        );

        // Grid and ticks.
        for x in x_ticks(&m) {
            let px = m.fx(x);
            let _ = writeln!(
                s,
                r##"<line x1="{px:.2}" y1="{MT}" x2="{px:.2}" y2="{:.2}" stroke="#dddddd" stroke-width="1"/>"##,
                HEIGHT - MB
            );
            let _ = writeln!(
                s,
                r#"<text x="{px:.2}" y="{:.2}" font-family="monospace" font-size="12" text-anchor="middle">{}</text>"#,
                HEIGHT - MB + 18.0,
                fmt_tick(x)
            );
        }
        for (t, label) in y_ticks(&m) {
            let py = MT + (1.0 - (t - m.ty0) / (m.ty1 - m.ty0)) * (HEIGHT - MT - MB);
            let _ = writeln!(
                s,
                r##"<line x1="{ML}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd" stroke-width="1"/>"##,
                WIDTH - MR
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="12" text-anchor="end">{}</text>"#,
                ML - 6.0,
                py + 4.0,
                esc(&label)
            );
        }

        // Bands first so lines draw on top.
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            if let Some(band) = &series.band {
                let rows: Vec<&(f64, f64, f64)> = band
                    .iter()
                    .filter(|(x, lo, hi)| x.is_finite() && self.usable_y(*lo) && self.usable_y(*hi))
                    .collect();
                if rows.len() >= 2 {
                    let mut d = String::new();
                    for (j, (x, _, hi)) in rows.iter().enumerate() {
                        let cmd = if j == 0 { 'M' } else { 'L' };
                        let _ = write!(d, "{cmd}{:.2},{:.2} ", m.fx(*x), m.fy(*hi));
                    }
                    for (x, lo, _) in rows.iter().rev() {
                        let _ = write!(d, "L{:.2},{:.2} ", m.fx(*x), m.fy(*lo));
                    }
                    d.push('Z');
                    let _ = writeln!(s, r#"<path d="{d}" fill="{color}" fill-opacity="0.18"/>"#);
                }
            }
        }

        for (y, label) in &self.hlines {
            if !self.usable_y(*y) {
                continue;
            }
            let py = m.fy(*y);
            let _ = writeln!(
                s,
                r##"<line x1="{ML}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#555555" stroke-width="1" stroke-dasharray="6,4"/>"##,
                WIDTH - MR
            );
            let _ = writeln!(
                s,
                r##"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="11" fill="#555555" text-anchor="end">{}</text>"##,
                WIDTH - MR - 4.0,
                py - 4.0,
                esc(label)
            );
        }

        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<(f64, f64)> = series
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && self.usable_y(*y))
                .map(|&(x, y)| (m.fx(x), m.fy(y)))
                .collect();
            if pts.len() >= 2 {
                let coords: Vec<String> =
                    pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    coords.join(" ")
                );
            }
            // Markers keep sparse curves (sweep points, degenerate tables)
            // visible; dense traces stay clean lines.
            if pts.len() <= 32 {
                for (x, y) in &pts {
                    let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
                }
            }
        }

        // Legend, top-right inside the frame.
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let y = MT + 16.0 + 16.0 * i as f64;
            let x = WIDTH - MR - 170.0;
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#,
                x + 22.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="12">{}</text>"#,
                x + 28.0,
                y + 4.0,
                esc(&series.label)
            );
        }

        let _ = writeln!(
            s,
            r##"<rect x="{ML}" y="{MT}" width="{:.2}" height="{:.2}" fill="none" stroke="#333333" stroke-width="1"/>"##,
            WIDTH - ML - MR,
            HEIGHT - MT - MB
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="13" text-anchor="middle">{}</text>"#,
            (ML + WIDTH - MR) / 2.0,
            HEIGHT - 14.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{:.2}" font-family="monospace" font-size="13" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            (MT + HEIGHT - MB) / 2.0,
            (MT + HEIGHT - MB) / 2.0,
            esc(&self.y_label)
        );
        s.push_str("</svg>\n");
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render())
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
    }
}
