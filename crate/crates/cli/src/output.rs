//! Point records as CSV, JSON and SVG.

use std::fmt::Write as _;
use std::io::Write;

use chsh_core::explore::{Quarter, ScanPoint, ScanSummary};
use serde_json::{json, Value};

pub const CSV_HEADER: [&str; 8] = ["idx", "V", "theta", "i0", "i1", "i2", "i3", "quarter"];

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_csv<W: Write>(points: &[ScanPoint], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for p in points {
        w.write_record([
            p.idx.to_string(),
            opt(p.v),
            opt(p.theta),
            num(p.i0),
            num(p.i1),
            num(p.i2),
            num(p.i3),
            p.quarter.map(Quarter::name).unwrap_or_default().to_string(),
        ])?;
    }
    w.flush()
}

pub fn point_json(p: &ScanPoint) -> Value {
    json!({
        "idx": p.idx,
        "V": p.v,
        "theta": p.theta,
        "i0": p.i0,
        "i1": p.i1,
        "i2": p.i2,
        "i3": p.i3,
        "quarter": p.quarter.map(Quarter::name),
    })
}

pub fn summary_json(s: &ScanSummary) -> Value {
    json!({
        "n": s.n,
        "max_radius": s.max_radius,
        "count_outside_lhv_square": s.count_outside_lhv_square,
        "count_outside_circle": s.count_outside_circle,
        "seed": s.seed,
    })
}

pub fn write_json<W: Write>(points: &[ScanPoint], summary: &ScanSummary, mut out: W) -> std::io::Result<()> {
    let doc = json!({
        "summary": summary_json(summary),
        "points": points.iter().map(point_json).collect::<Vec<_>>(),
    });
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)
}

pub const SVG_SIZE: f64 = 800.0;
pub const PLANE: f64 = 3.0;

fn px(x: f64) -> f64 {
    (x + PLANE) / (2.0 * PLANE) * SVG_SIZE
}

fn py(y: f64) -> f64 {
    (PLANE - y) / (2.0 * PLANE) * SVG_SIZE
}

fn colour(q: Option<Quarter>) -> &'static str {
    match q {
        None => "#333333",
        Some(Quarter::I0Max) => "#d62728",
        Some(Quarter::I0Min) => "#1f77b4",
        Some(Quarter::I1Max) => "#2ca02c",
        Some(Quarter::I1Min) => "#9467bd",
    }
}

/// Scatter of `(⟨I₀⟩, ⟨I₁⟩)` over `[−3, 3]²` with the LHV square and the
/// radius-2√2 circle.
pub fn render_svg(points: &[ScanPoint], title: &str) -> String {
    let scale = SVG_SIZE / (2.0 * PLANE);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 800" width="800" height="800">"#);
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(s, r##"<rect x="0" y="0" width="800" height="800" fill="#ffffff"/>"##);
    let _ = writeln!(s, r##"<g stroke="#cccccc" stroke-width="1">"##);
    for k in -3..=3 {
        let k = f64::from(k);
        let _ = writeln!(s, r#"<line x1="{:.3}" y1="0" x2="{:.3}" y2="800"/>"#, px(k), px(k));
        let _ = writeln!(s, r#"<line x1="0" y1="{:.3}" x2="800" y2="{:.3}"/>"#, py(k), py(k));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g stroke="#000000" stroke-width="1.5">"##);
    let _ = writeln!(s, r#"<line x1="0" y1="{:.3}" x2="800" y2="{:.3}"/>"#, py(0.0), py(0.0));
    let _ = writeln!(s, r#"<line x1="{:.3}" y1="0" x2="{:.3}" y2="800"/>"#, px(0.0), px(0.0));
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r##"<circle id="tsirelson-circle" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#000000" stroke-width="2"/>"##,
        px(0.0),
        py(0.0),
        2.0 * 2f64.sqrt() * scale
    );
    let _ = writeln!(
        s,
        r##"<rect id="lhv-square" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#000000" stroke-width="2"/>"##,
        px(-2.0),
        py(2.0),
        4.0 * scale,
        4.0 * scale
    );
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="14" text-anchor="middle">"#);
    for k in -3..=3 {
        let k = f64::from(k);
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}">{k}</text>"#, px(k), py(0.0) + 16.0);
    }
    let _ = writeln!(s, r#"<text x="780" y="{:.3}">⟨I₀⟩</text>"#, py(0.0) - 8.0);
    let _ = writeln!(s, r#"<text x="{:.3}" y="16">⟨I₁⟩</text>"#, px(0.0) + 24.0);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="points" stroke="none">"#);
    for p in points {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="1.5" fill="{}"/>"#, px(p.i0), py(p.i1), colour(p.quarter));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use chsh_core::bell::BellQuad;

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(-0.1), "-1.0000000000000001e-1");
        let x = 2.0 * 2f64.sqrt();
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_layout() {
        let mut p = ScanPoint::from_quad(3, &BellQuad::from_array([1.0, 0.0, -0.5, 0.25]));
        p.quarter = Some(Quarter::I1Min);
        let mut buf = Vec::new();
        write_csv(&[p], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("idx,V,theta,i0,i1,i2,i3,quarter"));
        assert_eq!(lines.next(), Some("3,,,1.0000000000000000e0,0.0000000000000000e0,-5.0000000000000000e-1,2.5000000000000000e-1,i1min"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn svg_has_overlays_and_one_marker_per_point() {
        let pts: Vec<_> = (0..5).map(|k| ScanPoint::from_quad(k, &BellQuad::from_array([0.1 * k as f64, 0.0, 0.0, 0.0]))).collect();
        let svg = render_svg(&pts, "t");
        assert!(svg.contains(r#"viewBox="0 0 800 800""#));
        assert!(svg.contains(r#"id="tsirelson-circle" cx="400.000" cy="400.000" r="377.124""#));
        assert!(svg.contains(r#"id="lhv-square" x="133.333" y="133.333" width="533.333" height="533.333""#));
        assert_eq!(svg.matches(r#"r="1.5""#).count(), 5);
    }
}
