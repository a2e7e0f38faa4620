//! Forgetting curves as a standalone SVG line chart.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::ForgettingMatrix;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One polyline per labelled run: x is the stage index, y the F1 on `domain`.
pub fn render_forgetting_svg(runs: &[(&str, &ForgettingMatrix)], domain: &str) -> Result<String> {
    if runs.is_empty() {
        return Err(Error::EmptyInput("forgetting runs"));
    }
    let mut curves = Vec::with_capacity(runs.len());
    for (label, matrix) in runs {
        let j = matrix.domain_index(domain)?;
        if matrix.stages() == 0 {
            return Err(Error::EmptyInput("forgetting matrix"));
        }
        curves.push((*label, matrix.curve(j)));
    }
    let stages = curves.iter().map(|(_, c)| c.len()).max().unwrap_or(1);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |k: usize| {
        if stages == 1 {
            LEFT + plot_w / 2.0
        } else {
            LEFT + plot_w * (k - 1) as f64 / (stages - 1) as f64
        }
    };
    let y = |f1: f64| TOP + plot_h * (1.0 - f1.clamp(0.0, 1.0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">F1 on {}</text>"#,
        LEFT + plot_w / 2.0,
        escape(domain)
    );
    let (x0, x1, y0, y1) = (LEFT, LEFT + plot_w, TOP, TOP + plot_h);
    let _ = writeln!(s, r#"<line x1="{x0:.1}" y1="{y1:.1}" x2="{x1:.1}" y2="{y1:.1}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x0:.1}" y2="{y1:.1}" stroke="black"/>"#);
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{x0:.1}" y1="{yy:.1}" x2="{x1:.1}" y2="{yy:.1}" stroke="#dddddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"##,
            x0 - 6.0,
            yy + 4.0
        );
    }
    for k in 1..=stages {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{k}</text>"#,
            x(k),
            y1 + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">stage</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    for (i, (label, curve)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = curve
            .iter()
            .enumerate()
            .map(|(k, &f)| format!("{:.1},{:.1}", x(k + 1), y(f)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(label)
        );
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 20.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text></g>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_forgetting_svg(runs: &[(&str, &ForgettingMatrix)], domain: &str, out: &Path) -> Result<()> {
    let svg = render_forgetting_svg(runs, domain)?;
    fs::write(out, svg).map_err(|e| Error::io(out, e))
}
