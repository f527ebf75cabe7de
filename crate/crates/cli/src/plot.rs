//! Minimal SVG line charts of CSV result rows.

use std::fmt::Write as _;

use hybeam::experiments::{Metric, ResultRow};

use crate::CliError;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Axis titles and series selected from the rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn matches(metric: &Metric, wanted: &str) -> bool {
    metric.base_name() == wanted || metric.to_string() == wanted
}

fn distinct<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut v: Vec<&str> = Vec::new();
    for s in items {
        if !v.contains(&s) {
            v.push(s);
        }
    }
    v
}

/// Select rows for `metric` (a base name such as `rate` or a full name such
/// as `rms_mean[M=100]`), optionally restricted to `schemes`.
pub fn build_chart(rows: &[ResultRow], metric: &str, schemes: &[String]) -> Result<Chart, CliError> {
    let selected: Vec<&ResultRow> = rows.iter().filter(|r| matches(&r.metric, metric)).collect();
    if selected.is_empty() {
        let names: Vec<String> = rows.iter().map(|r| r.metric.to_string()).collect();
        let mut avail = distinct(rows.iter().map(|r| r.metric.base_name()));
        for n in distinct(names.iter().map(String::as_str)) {
            if !avail.contains(&n) {
                avail.push(n);
            }
        }
        return Err(CliError::Config(format!(
            "unknown metric {metric:?}; available: {}",
            avail.join(", ")
        )));
    }
    let present = distinct(selected.iter().map(|r| r.scheme.as_str()));
    if let Some(bad) = schemes.iter().find(|s| !present.contains(&s.as_str())) {
        return Err(CliError::Config(format!(
            "unknown scheme {bad:?} for metric {metric}; available: {}",
            present.join(", ")
        )));
    }
    let keep = |r: &&&ResultRow| schemes.is_empty() || schemes.contains(&r.scheme);
    let names: Vec<String> = selected.iter().map(|r| r.metric.to_string()).collect();
    let several_metrics = distinct(names.iter().map(String::as_str)).len() > 1;

    let mut series: Vec<Series> = Vec::new();
    let mut x_label = "SNR P_t/σ² [dB]".to_string();
    let mut y_label = metric.to_string();
    for r in selected.iter().filter(keep) {
        let (label, point) = match r.metric {
            Metric::RmsMean { antennas } => {
                x_label = "antennas M".into();
                y_label = "mean RMS delay spread [taps]".into();
                (r.scheme.clone(), (antennas as f64, r.value))
            }
            Metric::RmsCdfPoint { antennas, prob } => {
                x_label = "RMS delay spread [taps]".into();
                y_label = "CDF".into();
                (format!("{} M={antennas}", r.scheme), (r.value, prob))
            }
            _ => {
                let Some(snr) = r.snr_db else { continue };
                let label = if several_metrics {
                    format!("{} {}", r.scheme, r.metric)
                } else {
                    r.scheme.clone()
                };
                if matches!(r.metric, Metric::Rate | Metric::Capacity) {
                    y_label = format!("{metric} [bit/s/Hz]");
                }
                (label, (snr, r.value))
            }
        };
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push(point),
            None => series.push(Series {
                label,
                points: vec![point],
            }),
        }
    }
    for s in &mut series {
        s.points.retain(|p| p.0.is_finite() && p.1.is_finite());
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    series.retain(|s| !s.points.is_empty());
    if series.is_empty() {
        return Err(CliError::Data(format!("no finite points for metric {metric}")));
    }
    let scenarios = distinct(selected.iter().map(|r| r.scenario.as_str()));
    Ok(Chart {
        title: format!("{} · {metric}", scenarios.join(", ")),
        x_label,
        y_label,
        series,
    })
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let n = if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    };
    n * mag
}

fn axis(lo: f64, hi: f64) -> (f64, f64, f64) {
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    };
    let step = nice_step((hi - lo) / 5.0);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0".to_string()
    } else {
        s
    }
}

pub fn render_svg(chart: &Chart) -> String {
    let pts = chart.series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (x0, x1, xs) = axis(x0, x1);
    let (y0, y1, ys) = axis(y0, y1);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&chart.title)
    );

    let _ = writeln!(s, r##"<g stroke="#dddddd" stroke-width="1">"##);
    let mut ticks = String::new();
    let nx = ((x1 - x0) / xs).round() as usize;
    for i in 0..=nx {
        let v = x0 + i as f64 * xs;
        let x = px(v);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}"/>"#, TOP + ph);
        let _ = writeln!(
            ticks,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 16.0,
            fmt_tick(v, xs)
        );
    }
    let ny = ((y1 - y0) / ys).round() as usize;
    for i in 0..=ny {
        let v = y0 + i as f64 * ys;
        let y = py(v);
        let _ = writeln!(s, r#"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, LEFT + pw);
        let _ = writeln!(
            ticks,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            fmt_tick(v, ys)
        );
    }
    s.push_str("</g>\n");
    s.push_str(&ticks);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 18.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&chart.y_label)
    );

    for (i, series) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if series.points.len() > 1 {
            let path: Vec<String> = series
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                path.join(" ")
            );
        }
        for &(x, y) in &series.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y));
        }
        let ly = TOP + 14.0 + i as f64 * 18.0;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&series.label)
        );
    }
    s.push_str("</svg>\n");
    s
}
