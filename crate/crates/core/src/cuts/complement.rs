use serde::{Deserialize, Serialize};

use super::curve::{coord, Curve};
use super::family::CutFamily;
use super::CutError;
use crate::geometry::point_segment_distance;
use crate::maps::Chart;
use crate::raster::{label_components, SphereGrid};

pub const MIN_COMPLEMENT_RESOLUTION: usize = 64;
/// Edges are drawn in a chart only when both endpoints lie within this modulus.
const DRAW_BOUND: f64 = 3.0;

/// Raster stand-in for the complement `U_n` of the cuts up to level `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementDescription {
    pub resolution: usize,
    pub component_count: usize,
    /// Component per pixel of the two-chart grid; `None` on the cuts.
    pub labels: Vec<Option<u32>>,
}

/// Removes pixels whose center is within half a pixel of an arc of levels
/// `0..=n`, then labels the 4-connected components of the rest (chart
/// cross-links are only used away from the arcs).
pub fn complement_description(cf: &CutFamily, n: usize, resolution: usize) -> Result<ComplementDescription, CutError> {
    if n > cf.depth {
        return Err(CutError::LevelOutOfRange { level: n, depth: cf.depth });
    }
    let curves: Vec<&Curve> = cf.levels[..=n].iter().flatten().map(|a| &a.curve).collect();
    complement_of_curves(&curves, resolution)
}

pub fn complement_of_curves(curves: &[&Curve], resolution: usize) -> Result<ComplementDescription, CutError> {
    if resolution < MIN_COMPLEMENT_RESOLUTION {
        return Err(CutError::TooCoarse(resolution));
    }
    let grid = SphereGrid::new(resolution);
    let h = grid.pixel_size();
    let hw = grid.half_width;
    let mut dist = vec![f64::INFINITY; grid.len()];
    for cv in curves {
        for w in cv.vertices.windows(2) {
            for chart in [Chart::Plane, Chart::Inverted] {
                let (Some(a), Some(b)) = (coord(w[0], chart), coord(w[1], chart)) else { continue };
                if a.norm() > DRAW_BOUND || b.norm() > DRAW_BOUND {
                    continue;
                }
                let reach = 2.0 * h;
                let col0 = ((a.re.min(b.re) - reach + hw) / h).floor().max(0.0) as usize;
                let col1 = ((a.re.max(b.re) + reach + hw) / h).floor().min(resolution as f64 - 1.0);
                let row0 = ((hw - a.im.max(b.im) - reach) / h).floor().max(0.0) as usize;
                let row1 = ((hw - a.im.min(b.im) + reach) / h).floor().min(resolution as f64 - 1.0);
                if col1 < 0.0 || row1 < 0.0 {
                    continue;
                }
                for row in row0..=row1 as usize {
                    for col in col0..=col1 as usize {
                        let center = num_complex::Complex64::new(-hw + (col as f64 + 0.5) * h, hw - (row as f64 + 0.5) * h);
                        let Some(idx) = grid.locate_in(chart, center) else { continue };
                        let d = point_segment_distance(a, b, center);
                        if d < dist[idx] {
                            dist[idx] = d;
                        }
                    }
                }
            }
        }
    }
    let keys: Vec<Option<()>> = dist.iter().map(|&d| (d > 0.5 * h).then_some(())).collect();
    let (labels, component_count) = label_components(&grid, &keys, |idx| dist[idx] > 2.0 * h);
    Ok(ComplementDescription { resolution, component_count, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::SpherePoint;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn arc_does_not_separate() {
        let z = Curve::segment(c(-1., 0.), c(1., 0.)).unwrap();
        assert_eq!(complement_of_curves(&[&z], 128).unwrap().component_count, 1);
    }

    #[test]
    fn circle_separates() {
        let pts: Vec<SpherePoint> = (0..=32)
            .map(|k| SpherePoint::from(Complex64::from_polar(0.8, std::f64::consts::TAU * (k % 32) as f64 / 32.0)))
            .collect();
        let circle = Curve::new(pts, 0.02).unwrap();
        assert_eq!(complement_of_curves(&[&circle], 128).unwrap().component_count, 2);
        // A circle crossing both charts.
        let pts: Vec<SpherePoint> = (0..=64)
            .map(|k| SpherePoint::from(c(1.2, 0.) + Complex64::from_polar(1.0, std::f64::consts::TAU * (k % 64) as f64 / 64.0)))
            .collect();
        let circle = Curve::new(pts, 0.02).unwrap();
        assert_eq!(complement_of_curves(&[&circle], 128).unwrap().component_count, 2);
    }

    #[test]
    fn line_through_infinity_separates() {
        // The extended real line is a circle on the sphere.
        let line = Curve::new(
            vec![SpherePoint::real(0.0), SpherePoint::real(1e3), crate::sphere::Infinity, SpherePoint::real(-1e3), SpherePoint::real(0.0)],
            0.02,
        )
        .unwrap();
        assert_eq!(complement_of_curves(&[&line], 128).unwrap().component_count, 2);
    }

    #[test]
    fn too_coarse() {
        let z = Curve::segment(c(-1., 0.), c(1., 0.)).unwrap();
        assert!(matches!(complement_of_curves(&[&z], 32), Err(CutError::TooCoarse(32))));
    }
}
