//! Writing scan results as CSV, JSON or an SVG figure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scan::{ScanFailure, ScanResult, ScanRow};

pub const CSV_HEADER: &str = "axis,n_a,g2,d_na,d_g2,residual,n_cavity,n_mech";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(Error::Parse(format!("unknown output format '{other}'"))),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Comment line marking where a partial scan stopped.
pub fn failure_line(f: &ScanFailure) -> String {
    let pass = if f.baseline { "baseline" } else { "coupled" };
    format!(
        "# failed index={} axis={} pass={pass} kind={}: {}",
        f.index,
        f.axis_value,
        f.kind,
        f.message.replace('\n', " ")
    )
}

/// Rows as CSV with the fixed header. Missing values are empty fields; a
/// partial scan ends with a `#` comment naming the failing point.
pub fn to_csv(result: &ScanResult) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
    for row in &result.rows {
        w.serialize(row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(format!("csv: {e}")))?;
    let mut text = String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(f) = &result.failure {
        text.push_str(&failure_line(f));
        text.push('\n');
    }
    Ok(text)
}

/// Parses CSV written by [`to_csv`], skipping comment lines.
pub fn read_csv(text: &str) -> Result<Vec<ScanRow>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected csv header '{}'", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

pub fn to_json(result: &ScanResult) -> Result<String> {
    serde_json::to_string_pretty(result).map_err(|e| Error::Parse(format!("json: {e}")))
}

pub fn render(result: &ScanResult, format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(result),
        Format::Json => to_json(result),
        Format::Svg => Ok(to_svg(result)),
    }
}

/// Writes `text` to `path`, or to standard output when `path` is `None`.
pub fn write_output(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io { path: p.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

struct Series<'a> {
    name: &'a str,
    color: &'a str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

struct Panel<'a> {
    ylabel: &'a str,
    series: Vec<Series<'a>>,
}

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 220.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const GAP: f64 = 50.0;

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    if hi - lo <= 1e-300_f64.max(1e-12 * hi.abs()) {
        let pad = if hi == 0.0 { 1.0 } else { 0.05 * hi.abs() };
        return Some((lo - pad, hi + pad));
    }
    let pad = 0.05 * (hi - lo);
    Some((lo - pad, hi + pad))
}

/// Stacked panels of `n_a`, `g2` and the deviations against the axis.
pub fn to_svg(result: &ScanResult) -> String {
    let meta = &result.metadata;
    let log_x = meta.log_axis;
    let fx = |x: f64| if log_x { x.log10() } else { x };
    let xs: Vec<f64> = result.rows.iter().map(|r| r.axis).collect();

    // Coupling sweeps carry a single baseline point; draw it across the axis.
    let baseline_series = |pick: fn(&ScanRow) -> Option<f64>| -> Vec<(f64, f64)> {
        match result.baseline.as_slice() {
            [] => Vec::new(),
            [only] if result.rows.len() > 1 => match (pick(only), xs.first(), xs.last()) {
                (Some(v), Some(&a), Some(&b)) => vec![(a, v), (b, v)],
                _ => Vec::new(),
            },
            many => many.iter().filter_map(|r| pick(r).map(|v| (r.axis, v))).collect(),
        }
    };
    let coupled = |pick: fn(&ScanRow) -> Option<f64>| -> Vec<(f64, f64)> {
        result.rows.iter().filter_map(|r| pick(r).map(|v| (r.axis, v))).collect()
    };

    let mut panels = vec![
        Panel {
            ylabel: "n_a",
            series: vec![
                Series { name: "coupled", color: "#1f4e9c", dashed: false, points: coupled(|r| Some(r.n_a)) },
                Series { name: "uncoupled", color: "#888888", dashed: true, points: baseline_series(|r| Some(r.n_a)) },
            ],
        },
        Panel {
            ylabel: "g2",
            series: vec![
                Series { name: "coupled", color: "#b0321a", dashed: false, points: coupled(|r| r.g2) },
                Series { name: "uncoupled", color: "#888888", dashed: true, points: baseline_series(|r| r.g2) },
            ],
        },
    ];
    if result.rows.iter().any(|r| r.d_na.is_some()) {
        panels.push(Panel {
            ylabel: "deviation",
            series: vec![
                Series { name: "d_na", color: "#1f4e9c", dashed: false, points: coupled(|r| r.d_na) },
                Series { name: "d_g2", color: "#b0321a", dashed: false, points: coupled(|r| r.d_g2) },
            ],
        });
    }

    let height = TOP + panels.len() as f64 * (PANEL_HEIGHT + GAP) + 10.0;
    let plot_w = WIDTH - LEFT - RIGHT;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let title = meta.config.title.clone().unwrap_or_else(|| format!("{} scan over {}", meta.model, meta.axis_label));
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, esc(&title));

    let (x_lo, x_hi) = range(xs.iter().map(|&x| fx(x))).unwrap_or((0.0, 1.0));
    for (k, panel) in panels.iter().enumerate() {
        let top = TOP + k as f64 * (PANEL_HEIGHT + GAP);
        let bottom = top + PANEL_HEIGHT;
        let (y_lo, y_hi) = range(panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.1))).unwrap_or((0.0, 1.0));
        let px = |x: f64| LEFT + (fx(x) - x_lo) / (x_hi - x_lo) * plot_w;
        let py = |y: f64| bottom - (y - y_lo) / (y_hi - y_lo) * PANEL_HEIGHT;

        let _ = writeln!(svg, r##"<rect x="{LEFT}" y="{top}" width="{plot_w}" height="{PANEL_HEIGHT}" fill="none" stroke="#333"/>"##);
        for t in ticks(y_lo, y_hi) {
            let y = py(t);
            let _ = writeln!(svg, r##"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#333"/>"##, LEFT - 4.0);
            let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, format_tick(t));
        }
        for t in ticks(x_lo, x_hi) {
            let x = LEFT + (t - x_lo) / (x_hi - x_lo) * plot_w;
            let label = if log_x { format!("1e{t}") } else { format_tick(t) };
            let _ = writeln!(svg, r##"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{}" stroke="#333"/>"##, bottom + 4.0);
            let _ = writeln!(svg, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"#, bottom + 16.0);
        }
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            top + PANEL_HEIGHT / 2.0,
            top + PANEL_HEIGHT / 2.0,
            esc(panel.ylabel)
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + plot_w / 2.0, bottom + 32.0, esc(&meta.axis_label));

        for (j, s) in panel.series.iter().enumerate() {
            if s.points.is_empty() {
                continue;
            }
            let pts: Vec<String> = s.points.iter().filter(|p| p.1.is_finite()).map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let dash = if s.dashed { r#" stroke-dasharray="5,4""# } else { "" };
            let _ = writeln!(svg, r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#, s.color, pts.join(" "));
            let ly = top + 14.0 + 16.0 * j as f64;
            let lx = WIDTH - RIGHT + 10.0;
            let _ = writeln!(svg, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="1.5"{dash}/>"#, lx + 20.0, s.color);
            let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, esc(s.name));
        }
    }
    if let Some(f) = &result.failure {
        let _ = writeln!(svg, r##"<text x="{LEFT}" y="{}" fill="#b00">{}</text>"##, height - 4.0, esc(&failure_line(f)));
    }
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(t: f64) -> String {
    if t == 0.0 {
        "0".into()
    } else if t.abs() >= 1e4 || t.abs() < 1e-2 {
        format!("{t:.1e}")
    } else {
        let s = format!("{t:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}
