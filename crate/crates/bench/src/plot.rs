//! Standalone SVG line charts with a log-scale y axis.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{BenchError, Result};
use crate::trace::read_series;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YAxis {
    /// Objective minus `f_star`.
    Gap,
    /// Objective value.
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    OracleCalls,
    WallNs,
}

/// Values below this are drawn at the floor of the log axis.
pub const LOG_FLOOR: f64 = 1e-16;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One labelled series of `(oracle_calls, wall_ns, objective)` rows.
pub type Series = (String, Vec<(usize, u64, f64)>);

/// Renders the chart. For [`YAxis::Gap`] without `f_star` the smallest
/// objective over all series stands in for it.
pub fn svg_string(series: &[Series], y: YAxis, x: XAxis, f_star: Option<f64>) -> Result<String> {
    if series.is_empty() || series.iter().all(|(_, s)| s.is_empty()) {
        return Err(BenchError::EmptyTrace);
    }
    let shift = match y {
        YAxis::F => 0.0,
        YAxis::Gap => f_star.unwrap_or_else(|| {
            series
                .iter()
                .flat_map(|(_, s)| s.iter().map(|p| p.2))
                .fold(f64::INFINITY, f64::min)
        }),
    };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, s)| {
            s.iter()
                .map(|&(calls, ns, v)| {
                    let xv = match x {
                        XAxis::OracleCalls => calls as f64,
                        XAxis::WallNs => ns as f64,
                    };
                    let yv = v - shift;
                    let yv = if yv.is_nan() { LOG_FLOOR } else { yv.max(LOG_FLOOR) };
                    (xv, yv.log10())
                })
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let x_max = all.clone().map(|p| p.0).fold(0.0, f64::max).max(1.0);
    let y_lo = all.clone().map(|p| p.1).fold(f64::INFINITY, f64::min).floor();
    let mut y_hi = all.map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).min(300.0).ceil();
    if y_hi <= y_lo {
        y_hi = y_lo + 1.0;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + v / x_max * pw;
    let sy = |v: f64| TOP + (y_hi - v.min(y_hi)) / (y_hi - y_lo) * ph;

    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let step = ((y_hi - y_lo) / 10.0).ceil().max(1.0);
    let mut e = y_lo;
    while e <= y_hi + 1e-9 {
        let yy = sy(e);
        let _ = writeln!(
            w,
            r##"<line x1="{LEFT}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            yy + 4.0,
            e as i64
        );
        e += step;
    }
    for i in 0..=4 {
        let v = x_max * i as f64 / 4.0;
        let label = match x {
            XAxis::OracleCalls => format!("{v:.0}"),
            XAxis::WallNs => format!("{:.3}", v * 1e-9),
        };
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            sx(v),
            TOP + ph + 18.0
        );
    }
    let x_title = match x {
        XAxis::OracleCalls => "oracle calls",
        XAxis::WallNs => "wall time (s)",
    };
    let y_title = match y {
        YAxis::Gap => "objective gap",
        YAxis::F => "objective",
    };
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_title}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        w,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{y_title}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    for (i, p) in pts.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = p.iter().map(|&(a, b)| format!("{:.2},{:.2}", sx(a), sy(b))).collect();
        let _ = writeln!(
            w,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
    }
    for (i, (label, _)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = LEFT + pw - 180.0;
        let _ = writeln!(
            w,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Reads each `(label, csv)` trace (bundle or SGM format) and writes the
/// chart to `path`.
pub fn render_svg(traces: &[(String, PathBuf)], y: YAxis, x: XAxis, f_star: Option<f64>, path: &Path) -> Result<()> {
    let series = traces
        .iter()
        .map(|(label, csv)| Ok((label.clone(), read_series(csv)?)))
        .collect::<Result<Vec<_>>>()?;
    let svg = svg_string(&series, y, x, f_star)?;
    std::fs::write(path, svg).map_err(|e| BenchError::io(path, e))
}
