//! Log-log SVG of the six relative errors against `h`.

use std::fmt::Write as _;

use anyhow::{bail, Result};

use crate::report::Row;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn px(&self, log_h: f64) -> f64 {
        LEFT + (log_h - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, log_e: f64) -> f64 {
        HEIGHT - BOTTOM - (log_e - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

/// Renders the study. Identical rows give identical bytes.
pub fn render(rows: &[Row]) -> Result<String> {
    if rows.is_empty() {
        bail!("nothing to plot");
    }
    let logs: Vec<f64> = rows
        .iter()
        .flat_map(|r| r.errors)
        .filter(|e| *e > 0.0 && e.is_finite())
        .map(f64::log10)
        .collect();
    if logs.is_empty() {
        bail!("no positive finite errors to plot");
    }
    let (lo, hi) = logs.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let hs: Vec<f64> = rows.iter().map(|r| r.h.log10()).collect();
    let (hlo, hhi) = hs.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let pad = 0.15 * (hhi - hlo).max(0.3);
    let axes = Axes {
        x: (hlo - pad, hhi + pad),
        y: (lo.floor() - 0.5, hi.ceil()),
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (TOP, HEIGHT - BOTTOM);
    let _ = writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0);

    for d in axes.y.0.ceil() as i32..=axes.y.1.floor() as i32 {
        let y = axes.py(f64::from(d));
        let _ = writeln!(s, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#dddddd"/>"##);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, x0 - 6.0, y + 4.0);
    }
    for r in rows {
        let x = axes.px(r.h.log10());
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{y1}" stroke="#dddddd"/>"##);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1/{}</text>"#, y1 + 18.0, r.n);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">h</text>"#, (x0 + x1) / 2.0, HEIGHT - 8.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">relative error</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (k, color) in COLORS.iter().enumerate() {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.errors[k] > 0.0 && r.errors[k].is_finite())
            .map(|r| (axes.px(r.h.log10()), axes.py(r.errors[k].log10())))
            .collect();
        let _ = writeln!(s, r#"<g class="series" data-name="Er{}">"#, k + 1);
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        for (x, y) in &pts {
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        }
        let ly = y0 + 20.0 * (k as f64 + 1.0);
        let lx = x1 + 15.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"/>"#, lx + 25.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">Er{}</text>"#, lx + 32.0, ly + 4.0, k + 1);
        let _ = writeln!(s, "</g>");
    }

    // Slope-one triangle in the lower right: one unit of log h against one of log Er.
    let run = 0.25 * (axes.x.1 - axes.x.0);
    let (ax, ay) = (axes.x.1 - 0.08 * (axes.x.1 - axes.x.0) - run, axes.y.0 + 0.1);
    let (p0, p1, p2) = (
        (axes.px(ax), axes.py(ay)),
        (axes.px(ax + run), axes.py(ay)),
        (axes.px(ax + run), axes.py(ay + run)),
    );
    let _ = writeln!(
        s,
        r#"<polygon class="reference-triangle" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="black"/>"#,
        p0.0, p0.1, p1.0, p1.1, p2.0, p2.1
    );
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">1</text>"#, p1.0 + 5.0, (p1.1 + p2.1) / 2.0 + 4.0);
    let _ = writeln!(s, "</svg>");
    Ok(s)
}
