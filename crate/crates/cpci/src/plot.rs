//! Four-panel SVG of aggregate metrics against sample size.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::output::AggregatePoint;

type Metric = fn(&AggregatePoint) -> Option<f64>;

pub const PANELS: [(&str, Metric); 4] = [
    ("(A) Coverage", |p| p.coverage),
    ("(B) Average length", |p| p.avg_len),
    ("(C) Proportion containing 0", |p| p.prop_zero_in_set),
    ("(D) Average non-zero length", |p| p.avg_nonzero_len),
];

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 360.0;
const LEGEND_W: f64 = 200.0;
const MARGIN: (f64, f64, f64, f64) = (64.0, 20.0, 40.0, 50.0); // left, right, top, bottom

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Series keyed by label, each sorted by `n`.
fn series(points: &[AggregatePoint]) -> BTreeMap<String, Vec<&AggregatePoint>> {
    let scenarios: std::collections::BTreeSet<&str> = points.iter().map(|p| p.scenario.as_str()).collect();
    let mut out: BTreeMap<String, Vec<&AggregatePoint>> = BTreeMap::new();
    for p in points {
        let label = if scenarios.len() > 1 { format!("{} ({})", p.method, p.scenario) } else { p.method.clone() };
        out.entry(label).or_default().push(p);
    }
    for v in out.values_mut() {
        v.sort_by_key(|p| p.n);
    }
    out
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    mag * if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    }
}

/// Padded range and tick positions.
fn axis(values: impl Iterator<Item = f64>) -> ((f64, f64), Vec<f64>, usize) {
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo, hi) = (lo - pad, hi + pad);
    }
    let step = nice_step(hi - lo);
    let lo = (lo / step).floor() * step;
    let hi = (hi / step).ceil() * step;
    let count = ((hi - lo) / step).round() as usize;
    let ticks = (0..=count).map(|i| lo + i as f64 * step).collect();
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    ((lo, hi), ticks, decimals)
}

fn panel(svg: &mut String, ox: f64, oy: f64, title: &str, metric: Metric, series: &BTreeMap<String, Vec<&AggregatePoint>>) {
    let (ml, mr, mt, mb) = MARGIN;
    let (w, h) = (PANEL_W - ml - mr, PANEL_H - mt - mb);
    let all: Vec<&AggregatePoint> = series.values().flatten().copied().collect();
    let ((x0, x1), xticks, xdec) = axis(all.iter().map(|p| p.n as f64));
    let ((y0, y1), yticks, ydec) = axis(all.iter().filter_map(|p| metric(p)).filter(|v| v.is_finite()));
    let sx = |x: f64| ox + ml + (x - x0) / (x1 - x0) * w;
    let sy = |y: f64| oy + mt + h - (y - y0) / (y1 - y0) * h;

    let _ = writeln!(svg, r##"<g class="panel">"##);
    let _ = writeln!(svg, r##"<text x="{:.1}" y="{:.1}" font-size="15" font-weight="bold">{}</text>"##, ox + ml, oy + 24.0, escape(title));
    let _ = writeln!(
        svg,
        r##"<rect x="{:.1}" y="{:.1}" width="{w:.1}" height="{h:.1}" fill="none" stroke="#333"/>"##,
        ox + ml,
        oy + mt
    );
    for &t in &xticks {
        let x = sx(t);
        let _ = writeln!(svg, r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#333"/>"##, oy + mt + h, oy + mt + h + 5.0);
        let _ = writeln!(
            svg,
            r##"<text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">{t:.xdec$}</text>"##,
            oy + mt + h + 18.0
        );
    }
    for &t in &yticks {
        let y = sy(t);
        let _ = writeln!(svg, r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, ox + ml, ox + ml + w);
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{t:.ydec$}</text>"##,
            ox + ml - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">N</text>"##,
        ox + ml + w / 2.0,
        oy + PANEL_H - 10.0
    );
    for (i, points) in series.values().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let xy: Vec<(f64, f64)> = points
            .iter()
            .filter_map(|p| metric(p).filter(|v| v.is_finite()).map(|v| (sx(p.n as f64), sy(v))))
            .collect();
        if xy.len() > 1 {
            let path: Vec<String> = xy.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
            let _ = writeln!(svg, r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"##, path.join(" "));
        }
        for (x, y) in xy {
            let _ = writeln!(svg, r##"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"##);
        }
    }
    let _ = writeln!(svg, "</g>");
}

/// `comment` is embedded verbatim as an XML comment (`--` is defused).
pub fn render_svg(points: &[AggregatePoint], comment: &str) -> String {
    let series = series(points);
    let width = 2.0 * PANEL_W + LEGEND_W;
    let height = 2.0 * PANEL_H;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"##
    );
    if !comment.is_empty() {
        let _ = writeln!(svg, "<!--\n{}\n-->", comment.trim_end().replace("--", "- -"));
    }
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);
    for (i, (title, metric)) in PANELS.iter().enumerate() {
        let ox = (i % 2) as f64 * PANEL_W;
        let oy = (i / 2) as f64 * PANEL_H;
        panel(&mut svg, ox, oy, title, *metric, &series);
    }
    let lx = 2.0 * PANEL_W + 10.0;
    for (i, label) in series.keys().enumerate() {
        let y = MARGIN.2 + 20.0 * i as f64;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(svg, r##"<line x1="{lx}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"##, lx + 20.0);
        let _ = writeln!(svg, r##"<text x="{}" y="{}" font-size="12">{}</text>"##, lx + 26.0, y + 4.0, escape(label));
    }
    svg.push_str("</svg>\n");
    svg
}
