//! Static SVG plot of a region: real axis to the right, imaginary axis up.

use std::fmt::Write;

use cnrange::closedform::EllipseDescriptor;
use num_complex::Complex64;

const WIDTH: f64 = 640.0;
const MARGIN: f64 = 0.05;

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl Frame {
    fn fit(points: &[Complex64]) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in points {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
        }
        // A point or a segment still gets a visible box.
        let span = (x1 - x0).max(y1 - y0).max(1e-9 * (1.0 + x0.abs().max(y0.abs())));
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let half = 0.5 * span * (1.0 + 2.0 * MARGIN);
        Self { x0: cx - half, y1: cy + half, scale: WIDTH / (2.0 * half) }
    }

    fn map(&self, z: Complex64) -> (f64, f64) {
        ((z.re - self.x0) * self.scale, (self.y1 - z.im) * self.scale)
    }
}

fn path(frame: &Frame, pts: &[Complex64]) -> String {
    let mut s = String::new();
    for z in pts {
        let (x, y) = frame.map(*z);
        let _ = write!(s, "{x:.3},{y:.3} ");
    }
    s.trim_end().to_string()
}

pub fn render(polyline: &[Complex64], cloud: &[Complex64], ellipse: Option<&EllipseDescriptor>) -> String {
    let mut all: Vec<Complex64> = polyline.to_vec();
    all.extend_from_slice(cloud);
    if let Some(e) = ellipse {
        all.extend([e.focus1, e.focus2]);
    }
    let f = Frame::fit(&all);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{WIDTH}" viewBox="0 0 {WIDTH} {WIDTH}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (ox, oy) = f.map(Complex64::new(0.0, 0.0));
    if (0.0..=WIDTH).contains(&oy) {
        let _ = writeln!(s, r##"<line class="axis" x1="0" y1="{oy:.3}" x2="{WIDTH}" y2="{oy:.3}" stroke="#999" stroke-width="1"/>"##);
    }
    if (0.0..=WIDTH).contains(&ox) {
        let _ = writeln!(s, r##"<line class="axis" x1="{ox:.3}" y1="0" x2="{ox:.3}" y2="{WIDTH}" stroke="#999" stroke-width="1"/>"##);
    }
    if !cloud.is_empty() {
        let _ = writeln!(s, r##"<g class="samples" fill="#1f77b4" fill-opacity="0.35">"##);
        for z in cloud {
            let (x, y) = f.map(*z);
            let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="1"/>"#);
        }
        let _ = writeln!(s, "</g>");
    }
    if !polyline.is_empty() {
        let _ = writeln!(
            s,
            r##"<polygon class="boundary" points="{}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
            path(&f, polyline)
        );
    }
    if let Some(e) = ellipse {
        for z in [e.focus1, e.focus2] {
            let (x, y) = f.map(z);
            let _ = writeln!(s, r##"<circle class="focus" cx="{x:.3}" cy="{y:.3}" r="3" fill="#2ca02c"/>"##);
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_stays_inside_margin() {
        let pts: Vec<_> = (0..8).map(|i| Complex64::from_polar(2.0, i as f64)).collect();
        let f = Frame::fit(&pts);
        for z in &pts {
            let (x, y) = f.map(*z);
            let lo = WIDTH * MARGIN / (1.0 + 2.0 * MARGIN) - 1e-9;
            assert!(x >= lo && x <= WIDTH - lo && y >= lo && y <= WIDTH - lo, "{x} {y}");
        }
    }

    #[test]
    fn imaginary_axis_points_up() {
        let f = Frame::fit(&[Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0)]);
        assert!(f.map(Complex64::new(0.0, 1.0)).1 < f.map(Complex64::new(0.0, -1.0)).1);
    }

    #[test]
    fn single_point_renders() {
        let svg = render(&[Complex64::new(1.0, 1.0)], &[], None);
        assert!(svg.contains("<polygon") && svg.ends_with("</svg>\n"));
    }
}
