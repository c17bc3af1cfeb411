//! Minimal self-contained SVG scatter plot.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

pub struct Scatter<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub points: &'a [(f64, f64)],
    /// Horizontal dashed reference line.
    pub reference_y: Option<f64>,
}

fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

impl Scatter<'_> {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let xs = self.points.iter().map(|p| p.0);
        let ys = self.points.iter().map(|p| p.1).chain(self.reference_y);
        let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (x0, x1) = if x0.is_finite() { (0.0f64.min(x0), x1.max(x0 + 1.0)) } else { (0.0, 1.0) };
        let (y0, y1) = if y0.is_finite() { (y0, y1) } else { (0.0, 1.0) };
        let pad = ((y1 - y0) * 0.08).max(1e-3);
        (x0, x1, y0 - pad, y1 + pad)
    }

    pub fn render(&self, header_comments: &[String]) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

        let mut out = String::new();
        for c in header_comments {
            // "--" may not appear inside an XML comment.
            let _ = writeln!(out, "<!-- {} -->", c.replace("--", "- -"));
        }
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, self.title);

        // axes
        let (ax, ay) = (sx(x0), sy(y0));
        let _ = writeln!(out, r#"<line x1="{ax}" y1="{ay}" x2="{}" y2="{ay}" stroke="black"/>"#, sx(x1));
        let _ = writeln!(out, r#"<line x1="{ax}" y1="{ay}" x2="{ax}" y2="{}" stroke="black"/>"#, sy(y1));
        for t in ticks(x0, x1, 7) {
            let x = sx(t);
            let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{ay}" x2="{x:.2}" y2="{}" stroke="black"/>"#, ay + 5.0);
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, ay + 19.0, fmt_tick(t));
        }
        for t in ticks(y0, y1, 6) {
            let y = sy(t);
            let _ = writeln!(out, r#"<line x1="{}" y1="{y:.2}" x2="{ax}" y2="{y:.2}" stroke="black"/>"#, ax - 5.0);
            let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, ax - 8.0, y + 4.0, fmt_tick(t));
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            self.x_label
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + plot_h / 2.0,
            TOP + plot_h / 2.0,
            self.y_label
        );

        if let Some(r) = self.reference_y {
            let y = sy(r);
            let _ = writeln!(
                out,
                r#"<line class="reference" x1="{ax}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
                sx(x1)
            );
        }
        for &(x, y) in self.points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(x), sy(y));
        }
        out.push_str("</svg>\n");
        out
    }
}
