//! Minimal scatter-plot writer: points shaded by a weight, optional line, axes.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marker {
    Circle,
    Diamond,
}

#[derive(Debug, Clone)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    /// Shading weight; the largest weight is drawn darkest.
    pub weight: f64,
    pub marker: Marker,
}

/// `y = slope·x + intercept`, clipped to the plot.
#[derive(Debug, Clone, Copy)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 30.0;

fn gray(weight: f64, lo: f64, hi: f64) -> u8 {
    let f = if hi > lo { ((weight - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 1.0 };
    (230.0 * (1.0 - f)).round() as u8
}

pub fn scatter_svg(points: &[ScatterPoint], line: Option<Line>, title: &str) -> String {
    let fold = |f: fn(f64, f64) -> f64, init: f64, g: fn(&ScatterPoint) -> f64| points.iter().map(g).fold(init, f);
    let (mut x0, mut x1) = (fold(f64::min, f64::INFINITY, |p| p.x), fold(f64::max, f64::NEG_INFINITY, |p| p.x));
    let (mut y0, mut y1) = (fold(f64::min, f64::INFINITY, |p| p.y), fold(f64::max, f64::NEG_INFINITY, |p| p.y));
    if !(x1 > x0) {
        (x0, x1) = (x0 - 1.0, x0 + 1.0);
    }
    if !(y1 > y0) {
        (y0, y1) = (y0 - 1.0, y0 + 1.0);
    }
    let (w0, w1) = (fold(f64::min, f64::INFINITY, |p| p.weight), fold(f64::max, f64::NEG_INFINITY, |p| p.weight));
    let inner = SIZE - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * inner;
    let py = |y: f64| SIZE - MARGIN - (y - y0) / (y1 - y0) * inner;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="20" font-family="sans-serif" font-size="13">{title}</text>"#);
    if x0 <= 0.0 && 0.0 <= x1 {
        let _ = writeln!(s, r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="gray"/>"#, px(0.0), py(y0), py(y1));
    }
    if y0 <= 0.0 && 0.0 <= y1 {
        let _ = writeln!(s, r#"<line x1="{0:.2}" y1="{2:.2}" x2="{1:.2}" y2="{2:.2}" stroke="gray"/>"#, px(x0), px(x1), py(0.0));
    }
    for p in points {
        let g = gray(p.weight, w0, w1);
        let fill = format!("rgb({g},{g},{g})");
        let (cx, cy) = (px(p.x), py(p.y));
        match p.marker {
            Marker::Circle => {
                let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3.5" fill="{fill}" stroke="black" stroke-width="0.3"/>"#);
            }
            Marker::Diamond => {
                let _ = writeln!(
                    s,
                    r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{fill}" stroke="black" stroke-width="0.3"/>"#,
                    cx,
                    cy - 4.0,
                    cx + 4.0,
                    cy,
                    cx,
                    cy + 4.0,
                    cx - 4.0,
                    cy
                );
            }
        }
    }
    if let Some(l) = line {
        // Clip to the y range so near-vertical lines stay in view.
        let mut ends: Vec<(f64, f64)> = [x0, x1].iter().map(|&x| (x, l.slope * x + l.intercept)).collect();
        if l.slope != 0.0 {
            ends.extend([y0, y1].iter().map(|&y| ((y - l.intercept) / l.slope, y)));
        }
        let mut inside: Vec<(f64, f64)> = ends
            .into_iter()
            .filter(|&(x, y)| x >= x0 - 1e-12 && x <= x1 + 1e-12 && y >= y0 - 1e-12 && y <= y1 + 1e-12)
            .collect();
        inside.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let (Some(a), Some(b)) = (inside.first(), inside.last()) {
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-width="1.5"/>"#,
                px(a.0),
                py(a.1),
                px(b.0),
                py(b.1)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn darkest_point_has_largest_weight() {
        let pts = vec![
            ScatterPoint { x: 0.0, y: 0.0, weight: 0.0, marker: Marker::Circle },
            ScatterPoint { x: 1.0, y: 1.0, weight: 2.0, marker: Marker::Diamond },
        ];
        let svg = scatter_svg(&pts, Some(Line { slope: 1.0, intercept: 0.0 }), "t");
        assert!(svg.contains("rgb(230,230,230)"));
        assert!(svg.contains("rgb(0,0,0)"));
        assert!(svg.contains("crimson"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
