use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::records::{mean_std, ExperimentRecord};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Mean and standard deviation of the gap at each query count.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub algorithm: String,
    pub points: Vec<(f64, f64, f64)>,
}

/// Gaps per query count for one algorithm.
type AlgorithmSamples = (String, BTreeMap<u64, Vec<f64>>);

/// Curves per environment, environments and algorithms in first-seen order.
pub fn curves(records: &[ExperimentRecord]) -> Vec<(String, Vec<Curve>)> {
    let mut envs: Vec<(String, Vec<AlgorithmSamples>)> = Vec::new();
    for r in records {
        let pos = match envs.iter().position(|(e, _)| *e == r.env) {
            Some(i) => i,
            None => {
                envs.push((r.env.clone(), Vec::new()));
                envs.len() - 1
            }
        };
        let algs = &mut envs[pos].1;
        let apos = match algs.iter().position(|(a, _)| *a == r.algorithm) {
            Some(i) => i,
            None => {
                algs.push((r.algorithm.clone(), BTreeMap::new()));
                algs.len() - 1
            }
        };
        algs[apos].1.entry(r.expert_queries).or_default().push(r.nash_gap);
    }
    envs.into_iter()
        .map(|(env, algs)| {
            let cs = algs
                .into_iter()
                .map(|(algorithm, by_q)| Curve {
                    algorithm,
                    points: by_q
                        .into_iter()
                        .map(|(q, gaps)| {
                            let (m, s) = mean_std(&gaps);
                            (q as f64, m, s)
                        })
                        .collect(),
                })
                .collect();
            (env, cs)
        })
        .collect()
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Self-contained SVG with a log-scale query axis and mean curves over
/// shaded one-std bands. Points with zero queries cannot sit on a log axis
/// and are dropped.
pub fn render_svg(title: &str, curves: &[Curve]) -> String {
    let pts = curves.iter().flat_map(|c| c.points.iter()).filter(|p| p.0 > 0.0);
    let (mut xmin, mut xmax, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, m, s) in pts {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymax = ymax.max(m + s);
    }
    let (lo, hi) = if xmin.is_finite() {
        let lo = xmin.log10().floor();
        (lo, xmax.log10().ceil().max(lo + 1.0))
    } else {
        (0.0, 1.0)
    };
    let ymax = if ymax > 0.0 { ymax * 1.05 } else { 1.0 };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x.log10() - lo) / (hi - lo) * pw;
    let sy = |y: f64| TOP + (1.0 - y.clamp(0.0, ymax) / ymax) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for d in lo as i64..=hi as i64 {
        let x = LEFT + (d as f64 - lo) / (hi - lo) * pw;
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"##,
            TOP + ph,
            TOP + ph + 16.0
        );
    }
    for i in 0..=5 {
        let y = ymax * i as f64 / 5.0;
        let py = sy(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0,
            fmt_num(y)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">expert queries</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">Nash gap</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let p: Vec<&(f64, f64, f64)> = c.points.iter().filter(|p| p.0 > 0.0).collect();
        if !p.is_empty() {
            let upper = p.iter().map(|&&(x, m, s)| format!("{:.2},{:.2}", sx(x), sy(m + s)));
            let lower = p.iter().rev().map(|&&(x, m, s)| format!("{:.2},{:.2}", sx(x), sy(m - s)));
            let band: Vec<String> = upper.chain(lower).collect();
            let _ = writeln!(
                svg,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                band.join(" ")
            );
            let line: Vec<String> = p.iter().map(|&&(x, m, _)| format!("{:.2},{:.2}", sx(x), sy(m))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                line.join(" ")
            );
        }
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&c.algorithm)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
