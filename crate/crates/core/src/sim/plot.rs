//! Minimal self-contained SVG line charts.

use std::fmt::Write;

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Half-width of a shaded band around `y`.
    pub band: Option<Vec<f64>>,
    pub color: String,
    pub dashed: bool,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const ML: f64 = 64.0;
const MR: f64 = 150.0;
const MT: f64 = 36.0;
const MB: f64 = 48.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn svg_chart(title: &str, xlabel: &str, series: &[Series]) -> String {
    let finite = |v: &f64| v.is_finite();
    let mut xs = series.iter().flat_map(|s| s.x.iter().copied()).filter(finite).peekable();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    if xs.peek().is_none() {
        x_lo = 0.0;
        x_hi = 1.0;
    }
    for x in xs {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
    }
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for (k, y) in s.y.iter().enumerate() {
            let w = s.band.as_ref().map_or(0.0, |b| b[k]);
            if y.is_finite() && w.is_finite() {
                y_lo = y_lo.min(y - w);
                y_hi = y_hi.max(y + w);
            }
        }
    }
    if !y_lo.is_finite() {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi <= y_lo {
        y_hi = y_lo + 1.0;
    }
    let pad = 0.05 * (y_hi - y_lo);
    let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);
    let px = |x: f64| ML + (x - x_lo) / (x_hi - x_lo) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - y_lo) / (y_hi - y_lo) * (H - MT - MB);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (W - MR + ML) / 2.0, esc(title));
    let (x0, x1, y0, y1) = (ML, W - MR, MT, H - MB);
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0);
    for k in 0..=4 {
        let fx = x_lo + (x_hi - x_lo) * k as f64 / 4.0;
        let fy = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#, px(fx), y1 + 16.0, fx);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#, x0 - 4.0, py(fy) + 4.0, fy);
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 10.0, esc(xlabel));

    for (i, s) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = s
            .x
            .iter()
            .zip(&s.y)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| (*x, *y))
            .collect();
        if let Some(band) = &s.band {
            let mut poly = String::new();
            for (k, (x, y)) in s.x.iter().zip(&s.y).enumerate() {
                let _ = write!(poly, "{:.2},{:.2} ", px(*x), py(y + band[k]));
            }
            for (k, (x, y)) in s.x.iter().zip(&s.y).enumerate().rev() {
                let _ = write!(poly, "{:.2},{:.2} ", px(*x), py(y - band[k]));
            }
            let _ = writeln!(out, r#"<polygon points="{}" fill="{}" fill-opacity="0.2" stroke="none"/>"#, poly.trim_end(), s.color);
        }
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#, path.join(" "), s.color);
        let ly = MT + 16.0 * i as f64 + 8.0;
        let _ = writeln!(out, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"{dash}/>"#, x1 + 10.0, x1 + 30.0, s.color);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, x1 + 34.0, ly + 4.0, esc(&s.label));
    }
    out.push_str("</svg>\n");
    out
}
