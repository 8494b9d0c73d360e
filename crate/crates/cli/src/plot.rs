//! Static SVG line chart of mean Hamming distance against `pd`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{HarnessError, Result};
use crate::experiment::ExperimentRecord;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// One point of a series: mean hd and its standard error over trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub pd: f64,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<SeriesPoint>,
}

/// Groups records by method (and error rate, when more than one is present)
/// and averages hd per `pd`.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<Series> {
    let mut errs: Vec<f64> = records.iter().map(|r| r.err).collect();
    errs.sort_by(f64::total_cmp);
    errs.dedup();
    let split_err = errs.len() > 1;

    let mut groups: BTreeMap<(String, u64), BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.method.clone(), r.err.to_bits()))
            .or_default()
            .entry(r.pd.to_bits())
            .or_default()
            .push(r.hd as f64);
    }

    let mut series: Vec<Series> = groups
        .into_iter()
        .map(|((method, err), by_pd)| {
            let mut points: Vec<SeriesPoint> = by_pd
                .into_iter()
                .map(|(pd, hds)| {
                    let k = hds.len() as f64;
                    let mean = hds.iter().sum::<f64>() / k;
                    let stderr = if hds.len() > 1 {
                        (hds.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
                    } else {
                        0.0
                    };
                    SeriesPoint {
                        pd: f64::from_bits(pd),
                        mean,
                        stderr,
                        trials: hds.len(),
                    }
                })
                .collect();
            points.sort_by(|a, b| a.pd.total_cmp(&b.pd));
            let label = if split_err {
                format!("{method} err={}", f64::from_bits(err))
            } else {
                method
            };
            Series { label, points }
        })
        .collect();
    series.sort_by(|a, b| a.label.cmp(&b.label));
    series
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .into_iter()
        .map(|f| f * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(records: &[ExperimentRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(HarnessError::Usage("no data rows to plot".into()));
    }
    let series = summarize(records);

    let pds = series.iter().flat_map(|s| s.points.iter().map(|p| p.pd));
    let (mut x_lo, mut x_hi) = pds.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if x_hi - x_lo < 1e-9 {
        x_lo -= 0.1;
        x_hi += 0.1;
    }
    let y_top = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.mean + p.stderr))
        .fold(0.0f64, f64::max);
    let y_step = nice_step(if y_top > 0.0 { y_top } else { 1.0 });
    let y_hi = (y_top / y_step).floor() * y_step + y_step;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + plot_h - y / y_hi * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    let (x0, x1, y0, y1) = (LEFT, LEFT + plot_w, TOP + plot_h, TOP);
    let _ = writeln!(out, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(out, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#);
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="ticks">"#);
    let mut xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.pd)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let px = sx(x);
        let _ = writeln!(out, r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(out, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{x}</text>"#, y0 + 19.0);
    }
    let ticks = (y_hi / y_step).round() as usize;
    for k in 0..=ticks {
        let y = k as f64 * y_step;
        let py = sy(y);
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            (y * 1e6).round() / 1e6
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">pd</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">mean Hamming distance</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let label = escape(&s.label);
        let _ = writeln!(out, r#"<g class="series" data-label="{label}">"#);
        let mut d = String::new();
        for (k, p) in s.points.iter().enumerate() {
            let _ = write!(d, "{}{:.2} {:.2}", if k == 0 { "M " } else { " L " }, sx(p.pd), sy(p.mean));
        }
        let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="2"/>"#);
        for p in &s.points {
            let (px, lo, hi) = (sx(p.pd), sy((p.mean - p.stderr).max(0.0)), sy(p.mean + p.stderr));
            let _ = writeln!(
                out,
                r#"<line class="errbar" x1="{px:.2}" y1="{lo:.2}" x2="{px:.2}" y2="{hi:.2}" stroke="{color}"/>"#
            );
            for cap in [lo, hi] {
                let _ = writeln!(
                    out,
                    r#"<line class="errcap" x1="{:.2}" y1="{cap:.2}" x2="{:.2}" y2="{cap:.2}" stroke="{color}"/>"#,
                    px - 4.0,
                    px + 4.0
                );
            }
            let _ = writeln!(out, r#"<circle cx="{px:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sy(p.mean));
        }
        let ly = TOP + 12.0 + 20.0 * idx as f64;
        let lx = WIDTH - RIGHT + 16.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{label}</text>"#, lx + 26.0, ly + 4.0);
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
