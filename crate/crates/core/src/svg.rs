//! Minimal SVG 1.1 output for curves, drawn in the plane chart.

use std::fmt::Write;

use crate::cuts::Curve;
use crate::sphere::Finite;

/// Vertices beyond this modulus break the drawn path.
const DRAW_LIMIT: f64 = 1e3;

pub const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

/// A group of curves drawn in one color.
#[derive(Debug, Clone)]
pub struct Layer<'a> {
    pub id: String,
    pub color: String,
    pub curves: Vec<&'a Curve>,
}

/// Path data for `curve`, split wherever it leaves the drawable range.
fn path_data(curve: &Curve) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    for p in &curve.vertices {
        match p {
            Finite(z) if z.norm() <= DRAW_LIMIT => {
                let cmd = if pen_down { 'L' } else { 'M' };
                // Adding zero clears negative zeros so output is sign-stable.
                let _ = write!(d, "{cmd}{:.6} {:.6} ", z.re + 0.0, -z.im + 0.0);
                pen_down = true;
            }
            _ => pen_down = false,
        }
    }
    d.trim_end().to_string()
}

/// Renders the layers over the square `[-half_width, half_width]^2`.
pub fn render(layers: &[Layer<'_>], half_width: f64) -> String {
    let mut s = String::new();
    let w = 2.0 * half_width;
    let stroke = w / 600.0;
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="800" height="800" viewBox="{:.6} {:.6} {:.6} {:.6}">"#,
        -half_width, -half_width, w, w
    );
    for layer in layers {
        let _ = writeln!(
            s,
            r#"<g id="{}" fill="none" stroke="{}" stroke-width="{:.6}">"#,
            layer.id, layer.color, stroke
        );
        for curve in &layer.curves {
            let d = path_data(curve);
            if !d.is_empty() {
                let _ = writeln!(s, r#"<path d="{d}"/>"#);
            }
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{Infinity, SpherePoint};

    #[test]
    fn path_breaks_at_infinity() {
        let cv = Curve::new(vec![SpherePoint::real(500.0), Infinity, SpherePoint::real(-500.0)], 1.0).unwrap();
        let d = path_data(&cv);
        assert_eq!(d.matches('M').count(), 2);
    }

    #[test]
    fn renders_layers() {
        let cv = Curve::new(vec![SpherePoint::real(0.0), SpherePoint::real(1.0)], 2.0).unwrap();
        let svg = render(&[Layer { id: "level-0".into(), color: PALETTE[0].into(), curves: vec![&cv] }], 2.0);
        assert!(svg.contains(r#"<path d="M0.000000 0.000000 L1.000000 0.000000"/>"#));
        assert!(svg.starts_with("<?xml"));
    }
}
