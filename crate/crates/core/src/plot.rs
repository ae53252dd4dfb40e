//! Standalone SVG line charts of traces and sweep summaries.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::{SummaryRow, SUMMARY_HEADER};
use crate::metrics::{read_trace_rows, AveragedRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SummaryMetric {
    NTotalMax,
    NDiffMax,
    NIterCvg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    TraceNTotal,
    TraceNDiff,
    TraceSr,
    /// Reads `summary.csv` files; x is beta, y the metric mean.
    MetricVsBeta(SummaryMetric),
}

impl PlotKind {
    fn y_label(self) -> &'static str {
        match self {
            PlotKind::TraceNTotal => "Number of Total Words",
            PlotKind::TraceNDiff => "Number of Different Words",
            PlotKind::TraceSr => "Success Ratio",
            PlotKind::MetricVsBeta(SummaryMetric::NTotalMax) => "N_total_max",
            PlotKind::MetricVsBeta(SummaryMetric::NDiffMax) => "N_diff_max",
            PlotKind::MetricVsBeta(SummaryMetric::NIterCvg) => "N_iter_cvg",
        }
    }

    fn x_label(self) -> &'static str {
        match self {
            PlotKind::MetricVsBeta(_) => "beta",
            _ => "#Iteration",
        }
    }

    /// Convergence-time plots span orders of magnitude.
    fn log_y(self) -> bool {
        matches!(self, PlotKind::MetricVsBeta(SummaryMetric::NIterCvg))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub inputs: Vec<PathBuf>,
    pub labels: Vec<String>,
    pub output: PathBuf,
}

impl PlotSpec {
    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::invalid("inputs", "need at least one input file"));
        }
        if self.labels.len() != self.inputs.len() {
            return Err(Error::invalid(
                "labels",
                format!(
                    "{} labels for {} inputs",
                    self.labels.len(),
                    self.inputs.len()
                ),
            ));
        }
        Ok(())
    }
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Most points drawn per series; longer traces are thinned by stride.
const MAX_POINTS: usize = 4000;

fn load_series(kind: PlotKind, path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    if let PlotKind::MetricVsBeta(metric) = kind {
        let mut reader = csv::Reader::from_reader(file);
        let header = reader.headers().map_err(|e| schema(path, e))?;
        if header.iter().ne(SUMMARY_HEADER) {
            return Err(Error::Schema {
                path: path.to_owned(),
                reason: format!("expected summary header `{}`", SUMMARY_HEADER.join(",")),
            });
        }
        let rows: Vec<SummaryRow> = reader
            .deserialize()
            .collect::<csv::Result<_>>()
            .map_err(|e| schema(path, e))?;
        let mut pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| {
                let y = match metric {
                    SummaryMetric::NTotalMax => r.n_total_max_mean,
                    SummaryMetric::NDiffMax => r.n_diff_max_mean,
                    SummaryMetric::NIterCvg => r.n_iter_cvg_mean,
                };
                (r.beta, y)
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        return Ok(pts);
    }

    let rows: Vec<AveragedRecord> = read_trace_rows(file, path)?;
    let stride = rows.len().div_ceil(MAX_POINTS).max(1);
    let pick = |r: &AveragedRecord| {
        let y = match kind {
            PlotKind::TraceNTotal => r.n_total,
            PlotKind::TraceNDiff => r.n_diff,
            _ => r.sr,
        };
        (r.iteration as f64, y)
    };
    let mut pts: Vec<(f64, f64)> = rows.iter().step_by(stride).map(pick).collect();
    if let Some(last) = rows.last() {
        if !(rows.len() - 1).is_multiple_of(stride) {
            pts.push(pick(last));
        }
    }
    Ok(pts)
}

fn schema(path: &Path, e: csv::Error) -> Error {
    Error::Schema {
        path: path.to_owned(),
        reason: e.to_string(),
    }
}

pub fn load(spec: &PlotSpec) -> Result<Vec<Series>> {
    spec.validate()?;
    spec.inputs
        .iter()
        .zip(&spec.labels)
        .map(|(path, label)| {
            Ok(Series {
                label: label.clone(),
                points: load_series(spec.kind, path)?,
            })
        })
        .collect()
}

/// Reads the inputs and writes the chart to `spec.output`.
pub fn plot(spec: &PlotSpec) -> Result<()> {
    let series = load(spec)?;
    let svg = render_svg(spec.kind, &series);
    std::fs::write(&spec.output, svg).map_err(|e| Error::io(&spec.output, e))
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f",
];

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Roughly five round-numbered ticks covering `[lo, hi]`.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|f| f * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

/// Renders series as an SVG document with one `<path>` per series.
pub fn render_svg(kind: PlotKind, series: &[Series]) -> String {
    let log_y = kind.log_y();
    let ty = |y: f64| {
        if log_y {
            y.max(f64::MIN_POSITIVE).log10()
        } else {
            y
        }
    };
    let finite: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0))
        .collect();

    let (mut x0, mut x1, mut y0, mut y1) = finite.iter().fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(ty(y)), d.max(ty(y))),
    );
    if finite.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if log_y {
        y0 = y0.floor();
        y1 = y1.ceil();
    } else if !matches!(kind, PlotKind::MetricVsBeta(_)) {
        y0 = y0.min(0.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (ty(y) - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );

    let _ = writeln!(svg, r#"<g class="x-axis">"#);
    for t in linear_ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(kind.x_label())
    );
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="y-axis">"#);
    let y_ticks: Vec<(f64, String)> = if log_y {
        (y0 as i64..=y1 as i64)
            .map(|e| (10f64.powi(e as i32), format!("1e{e}")))
            .collect()
    } else {
        linear_ticks(y0, y1)
            .into_iter()
            .map(|t| (t, fmt_tick(t)))
            .collect()
    };
    for (t, label) in y_ticks {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(kind.y_label()),
        if log_y { " (log)" } else { "" }
    );
    let _ = writeln!(svg, "</g>");

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (x, y) in s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0))
        {
            let cmd = if d.is_empty() { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.2} {:.2} ", sx(*x), sy(*y));
        }
        let _ = writeln!(
            svg,
            r#"<path class="series" d="{}" fill="none" stroke="{color}" stroke-width="1.5"><title>{}</title></path>"#,
            d.trim_end(),
            escape(&s.label)
        );
    }

    let _ = writeln!(svg, r#"<g class="legend">"#);
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{:.2}" width="14" height="4" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            y - 2.0,
            x + 20.0,
            y + 4.0,
            escape(&s.label)
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    svg
}
