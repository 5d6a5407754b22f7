//! Planar segment predicates used by the simplicity, intersection and
//! rasterization code.

use num_complex::Complex64;

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    cross(b - a, c - a)
}

fn on_segment(a: Complex64, b: Complex64, p: Complex64) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

/// Closed-segment intersection test with exact handling of the collinear
/// and touching cases (up to floating-point orientation signs).
pub fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// An intersection point of two closed segments, if any. For overlapping
/// collinear segments one representative point is returned.
pub fn segment_intersection(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Option<Complex64> {
    if !segments_intersect(a, b, c, d) {
        return None;
    }
    let r = b - a;
    let s = d - c;
    let denom = cross(r, s);
    if denom != 0.0 {
        let t = cross(c - a, s) / denom;
        return Some(a + r * t.clamp(0.0, 1.0));
    }
    // Collinear: some endpoint lies on the other segment.
    [a, b, c, d]
        .into_iter()
        .find(|&p| on_segment(a, b, p) && on_segment(c, d, p))
}

/// Nearest point of the segment `[a, b]` to `p`.
pub fn closest_on_segment(a: Complex64, b: Complex64, p: Complex64) -> Complex64 {
    let r = b - a;
    let len2 = r.norm_sqr();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).re * r.re + (p - a).im * r.im) / len2;
    a + r * t.clamp(0.0, 1.0)
}

pub fn point_segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    (p - closest_on_segment(a, b, p)).norm()
}

/// Axis-aligned bounding box `(min_re, min_im, max_re, max_im)`.
pub fn bbox(points: &[Complex64]) -> (f64, f64, f64, f64) {
    points.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(x0, y0, x1, y1), p| (x0.min(p.re), y0.min(p.im), x1.max(p.re), y1.max(p.im)),
    )
}

/// All intersection points between the segments of two polylines, found by
/// a sort-and-sweep on the real coordinate. `skip` filters out segment pairs
/// by index (used to ignore adjacent segments of the same polyline).
pub fn polyline_intersections(
    p: &[Complex64],
    q: &[Complex64],
    skip: impl Fn(usize, usize) -> bool,
) -> Vec<Complex64> {
    let segs = |v: &[Complex64]| -> Vec<(Complex64, Complex64)> { v.windows(2).map(|w| (w[0], w[1])).collect() };
    segment_intersections(&segs(p), &segs(q), skip).into_iter().map(|(_, _, x)| x).collect()
}

/// Intersections between two segment sets as `(i, j, point)`, by the same
/// sweep as [`polyline_intersections`].
pub fn segment_intersections(
    p: &[(Complex64, Complex64)],
    q: &[(Complex64, Complex64)],
    skip: impl Fn(usize, usize) -> bool,
) -> Vec<(usize, usize, Complex64)> {
    let mut events: Vec<(f64, f64, bool, usize)> = Vec::with_capacity(p.len() + q.len());
    for (i, (a, b)) in p.iter().enumerate() {
        events.push((a.re.min(b.re), a.re.max(b.re), false, i));
    }
    for (j, (a, b)) in q.iter().enumerate() {
        events.push((a.re.min(b.re), a.re.max(b.re), true, j));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3)));
    let mut active: Vec<(f64, bool, usize)> = Vec::new();
    let mut out = Vec::new();
    for (lo, hi, from_q, idx) in events {
        active.retain(|&(ahi, _, _)| ahi >= lo);
        for &(_, other_q, other) in &active {
            if other_q == from_q {
                continue;
            }
            let (i, j) = if from_q { (other, idx) } else { (idx, other) };
            if skip(i, j) {
                continue;
            }
            if let Some(x) = segment_intersection(p[i].0, p[i].1, q[j].0, q[j].1) {
                out.push((i, j, x));
            }
        }
        active.push((hi, from_q, idx));
    }
    out
}

/// Merges points closer than `tol` (greedy, order-preserving).
pub fn dedup_points(points: &[Complex64], tol: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    for &p in points {
        if !out.iter().any(|q| (p - *q).norm() <= tol) {
            out.push(p);
        }
    }
    out
}
