//! Minimal deterministic SVG 1.1 line plots of labelled curves.

use std::fmt::Write;

use crate::curve::Curve2D;
use crate::error::{Error, Result};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub stroke_width: f64,
    pub title: Option<String>,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            width: 640.0,
            height: 480.0,
            margin: 56.0,
            stroke_width: 1.5,
            title: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCurve {
    pub label: String,
    pub curve: Curve2D,
}

impl LabeledCurve {
    pub fn new(label: impl Into<String>, curve: Curve2D) -> Self {
        LabeledCurve {
            label: label.into(),
            curve,
        }
    }
}

/// Renders curves (metres) on shared mm axes. Empty curves are skipped and
/// noted in an SVG comment.
pub fn render_svg(curves: &[LabeledCurve], style: &SvgStyle) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::Argument("nothing to plot".to_string()));
    }
    let drawable: Vec<&LabeledCurve> = curves.iter().filter(|c| !c.curve.is_empty()).collect();
    if drawable.is_empty() {
        return Err(Error::Argument("every curve is empty".to_string()));
    }

    let mm = |v: f64| v * 1e3;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in &drawable {
        for p in &c.curve.points {
            x0 = x0.min(mm(p[0]));
            x1 = x1.max(mm(p[0]));
            y0 = y0.min(mm(p[1]));
            y1 = y1.max(mm(p[1]));
        }
    }
    if !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite()) {
        return Err(Error::Argument("curve coordinates must be finite".to_string()));
    }
    let (xs, xe, xstep) = nice_range(x0, x1);
    let (ys, ye, ystep) = nice_range(y0, y1);

    let plot_w = style.width - 2.0 * style.margin;
    let plot_h = style.height - 2.0 * style.margin;
    let sx = |x: f64| style.margin + (x - xs) / (xe - xs) * plot_w;
    let sy = |y: f64| style.height - style.margin - (y - ys) / (ye - ys) * plot_h;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        fmt(style.width),
        fmt(style.height),
        fmt(style.width),
        fmt(style.height)
    );
    for (i, c) in curves.iter().enumerate() {
        if c.curve.is_empty() {
            let _ = writeln!(
                s,
                "<!-- warning: curve {i} ({}) is empty and was skipped -->",
                comment_safe(&c.label)
            );
        }
    }
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##,
        fmt(style.width),
        fmt(style.height)
    );

    let _ = writeln!(
        s,
        r##"<g stroke="#dddddd" stroke-width="0.5" font-family="sans-serif" font-size="11" fill="#333333">"##
    );
    for (i, x) in ticks(xs, xe, xstep).enumerate() {
        let px = sx(x);
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}"/><text x="{0}" y="{3}" stroke="none" text-anchor="middle" id="xt{i}">{4}</text>"#,
            fmt(px),
            fmt(style.margin),
            fmt(style.height - style.margin),
            fmt(style.height - style.margin + 16.0),
            tick_label(x, xstep)
        );
    }
    for (i, y) in ticks(ys, ye, ystep).enumerate() {
        let py = sy(y);
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}"/><text x="{3}" y="{4}" stroke="none" text-anchor="end" id="yt{i}">{5}</text>"#,
            fmt(style.margin),
            fmt(py),
            fmt(style.width - style.margin),
            fmt(style.margin - 6.0),
            fmt(py + 4.0),
            tick_label(y, ystep)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000000" stroke-width="1"/>"##,
        fmt(style.margin),
        fmt(style.margin),
        fmt(plot_w),
        fmt(plot_h)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">x (mm)</text>"#,
        fmt(style.margin + plot_w / 2.0),
        fmt(style.height - 12.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">y (mm)</text>"#,
        fmt(style.margin + plot_h / 2.0),
        fmt(style.margin + plot_h / 2.0)
    );
    if let Some(title) = &style.title {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
            fmt(style.width / 2.0),
            fmt(style.margin / 2.0),
            xml_escape(title)
        );
    }

    for (i, c) in drawable.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = c
            .curve
            .points
            .iter()
            .map(|p| format!("{},{}", fmt(sx(mm(p[0]))), fmt(sy(mm(p[1])))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="{}" points="{}"><title>{}</title></polyline>"#,
            fmt(style.stroke_width),
            pts.join(" "),
            xml_escape(&c.label)
        );
    }

    let lx = style.margin + 10.0;
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11">"#);
    for (i, c) in drawable.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let ly = style.margin + 16.0 + 15.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{2}" x2="{1}" y2="{2}" stroke="{color}" stroke-width="2"/><text x="{3}" y="{4}">{5}</text>"#,
            fmt(lx),
            fmt(lx + 18.0),
            fmt(ly),
            fmt(lx + 24.0),
            fmt(ly + 4.0),
            xml_escape(&c.label)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}

/// Expands `[lo, hi]` to multiples of a 1-2-5 step giving about 5 ticks.
fn nice_range(lo: f64, hi: f64) -> (f64, f64, f64) {
    let (lo, hi) = if hi - lo < 1e-9 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

fn ticks(start: f64, end: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = ((end - start) / step).round() as usize;
    (0..=n).map(move |i| start + i as f64 * step)
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    };
    let v = if v.abs() < step * 1e-9 { 0.0 } else { v };
    format!("{v:.decimals$}")
}

fn fmt(v: f64) -> String {
    let r = format!("{v:.3}");
    let r = r.trim_end_matches('0').trim_end_matches('.');
    if r == "-0" {
        "0".to_string()
    } else {
        r.to_string()
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn comment_safe(s: &str) -> String {
    xml_escape(s).replace("--", "- -")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveSource;

    fn line() -> Curve2D {
        Curve2D::new(
            (0..=30).map(|i| [i as f64 * 1e-3, 0.0]).collect(),
            CurveSource::Synthetic,
        )
    }

    #[test]
    fn single_line_has_one_polyline() {
        let svg = render_svg(&[LabeledCurve::new("straight", line())], &SvgStyle::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.ends_with("</svg>\n"));
        // all polyline y coordinates identical
        let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        let ys: Vec<&str> = pts.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn empty_curve_skipped_with_comment() {
        let empty = Curve2D::new(vec![], CurveSource::Synthetic);
        let svg = render_svg(
            &[LabeledCurve::new("a", line()), LabeledCurve::new("b", empty)],
            &SvgStyle::default(),
        )
        .unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("<!-- warning: curve 1 (b) is empty"));
        assert!(render_svg(&[], &SvgStyle::default()).is_err());
    }

    #[test]
    fn byte_identical() {
        let c = [LabeledCurve::new("x<y", line())];
        assert_eq!(
            render_svg(&c, &SvgStyle::default()).unwrap(),
            render_svg(&c, &SvgStyle::default()).unwrap()
        );
    }

    #[test]
    fn nice_ranges() {
        assert_eq!(nice_range(0.0, 30.0), (0.0, 30.0, 10.0));
        let (a, b, s) = nice_range(-0.3, 7.9);
        assert!(a <= -0.3 && b >= 7.9 && s == 2.0);
    }
}
