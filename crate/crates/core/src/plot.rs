//! Minimal SVG figures: scatter plots (optionally with an identity line and a
//! text annotation) and line plots.

use std::fmt::Write as _;

const W: f64 = 480.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

#[derive(Debug, Clone, Copy)]
struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn fit(xs: &[f64], ys: &[f64], square: bool) -> Axes {
        let span = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi > lo {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            } else {
                (lo - 1.0, hi + 1.0)
            }
        };
        let (mut x0, mut x1) = span(xs);
        let (mut y0, mut y1) = span(ys);
        if square {
            x0 = x0.min(y0);
            y0 = x0;
            x1 = x1.max(y1);
            y1 = x1;
        }
        Axes { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

fn frame(svg: &mut String, ax: &Axes, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let (l, r, t, b) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    for v in ticks(ax.x0, ax.x1) {
        let x = ax.px(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            b + 5.0,
            b + 18.0,
            tick_label(v)
        );
    }
    for v in ticks(ax.y0, ax.y1) {
        let y = ax.py(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            l - 5.0,
            l - 8.0,
            y + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{0}" text-anchor="middle" transform="rotate(-90 15 {0})">{1}</text>"#,
        (t + b) / 2.0,
        escape(y_label)
    );
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub struct Scatter<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub identity_line: bool,
    pub annotation: Option<String>,
}

pub fn scatter_svg(p: &Scatter<'_>) -> String {
    let ax = Axes::fit(p.xs, p.ys, p.identity_line);
    let mut svg = String::new();
    frame(&mut svg, &ax, p.title, p.x_label, p.y_label);
    if p.identity_line {
        let _ = writeln!(
            svg,
            r#"<line class="identity" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="grey" stroke-dasharray="4 3"/>"#,
            ax.px(ax.x0),
            ax.py(ax.x0),
            ax.px(ax.x1),
            ax.py(ax.x1)
        );
    }
    for (x, y) in p.xs.iter().zip(p.ys) {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue" fill-opacity="0.6"/>"#,
            ax.px(*x),
            ax.py(*y)
        );
    }
    if let Some(a) = &p.annotation {
        let _ = writeln!(
            svg,
            r#"<text class="annotation" x="{}" y="{}">{}</text>"#,
            LEFT + 10.0,
            TOP + 18.0,
            escape(a)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub struct LinePlot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub xs: &'a [f64],
    pub ys: &'a [f64],
}

pub fn line_svg(p: &LinePlot<'_>) -> String {
    let ax = Axes::fit(p.xs, p.ys, false);
    let mut svg = String::new();
    frame(&mut svg, &ax, p.title, p.x_label, p.y_label);
    let pts: Vec<String> = p
        .xs
        .iter()
        .zip(p.ys)
        .map(|(x, y)| format!("{:.2},{:.2}", ax.px(*x), ax.py(*y)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        pts.join(" ")
    );
    for (x, y) in p.xs.iter().zip(p.ys) {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="steelblue"/>"#,
            ax.px(*x),
            ax.py(*y)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Text of the `class="annotation"` element, unescaped.
pub fn annotation_text(svg: &str) -> Option<String> {
    let start = svg.find(r#"class="annotation""#)?;
    let open = start + svg[start..].find('>')? + 1;
    let close = open + svg[open..].find("</text>")?;
    Some(
        svg[open..close]
            .replace("&lt;", "<")
            .replace("&gt;", ">")
            .replace("&amp;", "&"),
    )
}
