//! Minimal SVG line charts written by hand.

use std::fmt::Write;

pub struct Series {
    pub label: String,
    pub color: &'static str,
    /// `stroke-dasharray` value, `None` for a solid line.
    pub dash: Option<&'static str>,
    pub points: Vec<(f64, f64)>,
}

pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const PANEL_W: f64 = 520.0;
const PANEL_H: f64 = 400.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const TICKS: usize = 5;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

impl LineChart {
    fn render_panel(&self, out: &mut String, offset_x: f64) {
        let points = || self.series.iter().flat_map(|s| s.points.iter());
        let (x_min, x_max) = bounds(points().map(|p| p.0));
        let (y_lo, y_hi) = bounds(points().map(|p| p.1));
        let pad = 0.05 * (y_hi - y_lo);
        let (y_min, y_max) = (y_lo - pad, y_hi + pad);

        let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
        let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
        let sx = |x: f64| offset_x + MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
        let sy = |y: f64| MARGIN_T + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-weight="bold">{}</text>"#,
            offset_x + MARGIN_L + plot_w / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#,
            offset_x + MARGIN_L
        );
        for i in 0..=TICKS {
            let t = i as f64 / TICKS as f64;
            let xv = x_min + t * (x_max - x_min);
            let yv = y_min + t * (y_max - y_min);
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{:.0}</text>"#,
                sx(xv),
                MARGIN_T + plot_h + 16.0,
                xv
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{:.4}</text>"#,
                offset_x + MARGIN_L - 6.0,
                sy(yv) + 4.0,
                yv
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            offset_x + MARGIN_L + plot_w / 2.0,
            PANEL_H - 15.0,
            escape(&self.x_label)
        );
        let (ylx, yly) = (offset_x + 16.0, MARGIN_T + plot_h / 2.0);
        let _ = writeln!(
            out,
            r#"<text x="{ylx:.1}" y="{yly:.1}" text-anchor="middle" transform="rotate(-90 {ylx:.1} {yly:.1})">{}</text>"#,
            escape(&self.y_label)
        );

        for s in &self.series {
            let path: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let dash = s
                .dash
                .map(|d| format!(r#" stroke-dasharray="{d}""#))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                s.color,
                path.join(" ")
            );
        }

        for (i, s) in self.series.iter().enumerate() {
            let x = offset_x + MARGIN_L + plot_w - 150.0;
            let y = MARGIN_T + 16.0 + 16.0 * i as f64;
            let dash = s
                .dash
                .map(|d| format!(r#" stroke-dasharray="{d}""#))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{}" stroke-width="1.5"{dash}/>"#,
                x + 24.0,
                s.color
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
                x + 30.0,
                y + 4.0,
                escape(&s.label)
            );
        }
    }
}

/// Renders charts side by side into one standalone SVG document.
pub fn render(charts: &[LineChart]) -> String {
    let width = PANEL_W * charts.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, chart) in charts.iter().enumerate() {
        chart.render_panel(&mut out, PANEL_W * i as f64);
    }
    out.push_str("</svg>\n");
    out
}
