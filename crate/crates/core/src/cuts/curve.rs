use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CutError;
use crate::geometry::{closest_on_segment, segment_intersections};
use crate::maps::Chart;
use crate::sphere::{chordal_distance, recip, Finite, Infinity, SpherePoint};

/// Default bound on the chordal length of a curve edge.
pub const DEFAULT_MAX_EDGE: f64 = 0.02;
/// Points closer than this (chordally) are treated as equal.
pub const POINT_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 60;
/// Segments are tested for crossings in a chart only when both endpoints
/// have modulus at most this there.
const PASS_BOUND: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointTag {
    CriticalValue,
    CriticalPoint,
    /// A point eventually mapped onto the marked cycle.
    Preperiodic,
    CyclePoint,
    /// Center of a Fatou component (the root of an internal ray).
    Center,
    /// Landing point of a ray.
    Landing,
    /// Preimage of a tagged endpoint.
    Preimage,
}

/// A broken line on the sphere. Each edge is straight in the chart selected
/// by [`segment_chart`], so no edge coordinate is ever unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub vertices: Vec<SpherePoint>,
    /// Tags of the first and last vertex.
    pub tags: [Option<EndpointTag>; 2],
    /// Refinement bound on the chordal length of every edge.
    pub max_edge: f64,
}

/// The chart in which the edge `a -> b` is straight: the plane chart when
/// `|a| |b| <= 1`, otherwise the inverted chart. The rule is symmetric under
/// `z -> 1/z`.
pub fn segment_chart(a: SpherePoint, b: SpherePoint) -> Chart {
    match (a, b) {
        (Finite(a), Finite(b)) if a.norm() * b.norm() <= 1.0 => Chart::Plane,
        _ => Chart::Inverted,
    }
}

/// Coordinate of `p` in `chart`, `None` where it is infinite.
pub fn coord(p: SpherePoint, chart: Chart) -> Option<Complex64> {
    match (chart, p) {
        (Chart::Plane, Finite(z)) => Some(z),
        (Chart::Plane, Infinity) => None,
        (Chart::Inverted, Infinity) => Some(Complex64::new(0.0, 0.0)),
        (Chart::Inverted, Finite(z)) if z == Complex64::new(0.0, 0.0) => None,
        (Chart::Inverted, Finite(z)) => Some(recip(z)),
    }
}

/// The sphere point with coordinate `w` in `chart`.
pub fn from_coord(w: Complex64, chart: Chart) -> SpherePoint {
    match chart {
        Chart::Plane => SpherePoint::from(w),
        Chart::Inverted => Finite(w).reciprocal(),
    }
}

/// The point at fraction `t` of the edge `a -> b`.
pub fn interpolate(a: SpherePoint, b: SpherePoint, t: f64) -> SpherePoint {
    if t <= 0.0 {
        return a;
    }
    if t >= 1.0 {
        return b;
    }
    let chart = segment_chart(a, b);
    match (coord(a, chart), coord(b, chart)) {
        (Some(x), Some(y)) => from_coord(x + (y - x) * t, chart),
        // Only reachable for antipodal-length edges; fall back to the other chart.
        _ => {
            let other = if chart == Chart::Plane { Chart::Inverted } else { Chart::Plane };
            let (x, y) = (coord(a, other).unwrap_or_default(), coord(b, other).unwrap_or_default());
            from_coord(x + (y - x) * t, other)
        }
    }
}

impl Curve {
    /// Builds a curve through `vertices`, bisecting edges until each is at
    /// most `max_edge` long. Consecutive duplicates are an error.
    pub fn new(vertices: Vec<SpherePoint>, max_edge: f64) -> Result<Self, CutError> {
        if !(max_edge > 0.0) {
            return Err(CutError::InvalidCurve(format!("refinement bound must be positive, got {max_edge}")));
        }
        if vertices.len() < 2 {
            return Err(CutError::InvalidCurve("a curve needs at least two vertices".into()));
        }
        let mut out = Vec::with_capacity(vertices.len());
        out.push(vertices[0]);
        for w in vertices.windows(2) {
            if chordal_distance(w[0], w[1]) <= POINT_TOL {
                return Err(CutError::InvalidCurve(format!("repeated vertex {}", w[1])));
            }
            refine_edge(w[0], w[1], max_edge, 0, &mut out);
        }
        Ok(Self { vertices: out, tags: [None, None], max_edge })
    }

    /// A straight edge in the chart of [`segment_chart`], refined to the default bound.
    pub fn segment(a: impl Into<SpherePoint>, b: impl Into<SpherePoint>) -> Result<Self, CutError> {
        Self::new(vec![a.into(), b.into()], DEFAULT_MAX_EDGE)
    }

    /// Wraps already refined vertices without re-refining them.
    pub(crate) fn from_refined(vertices: Vec<SpherePoint>, tags: [Option<EndpointTag>; 2], max_edge: f64) -> Self {
        Self { vertices, tags, max_edge }
    }

    pub fn with_tags(mut self, start: Option<EndpointTag>, end: Option<EndpointTag>) -> Self {
        self.tags = [start, end];
        self
    }

    pub fn start(&self) -> SpherePoint {
        self.vertices[0]
    }

    pub fn end(&self) -> SpherePoint {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.len() > 2 && chordal_distance(self.start(), self.end()) <= POINT_TOL
    }

    pub fn segment_count(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self { vertices: v, tags: [self.tags[1], self.tags[0]], max_edge: self.max_edge }
    }

    /// Point at parameter `s` in `[0, segment_count]`; integers are vertices.
    pub fn point_at(&self, s: f64) -> SpherePoint {
        let n = self.segment_count();
        if s >= n as f64 {
            return self.end();
        }
        let i = s.max(0.0).floor() as usize;
        interpolate(self.vertices[i], self.vertices[i + 1], s - i as f64)
    }

    pub fn max_edge_length(&self) -> f64 {
        self.vertices.windows(2).map(|w| chordal_distance(w[0], w[1])).fold(0.0, f64::max)
    }

    /// Chordal length of the polyline.
    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| chordal_distance(w[0], w[1])).sum()
    }

    /// Edge `i` in its own chart, with that chart.
    pub fn edge(&self, i: usize) -> (Chart, Complex64, Complex64) {
        let (a, b) = (self.vertices[i], self.vertices[i + 1]);
        let chart = segment_chart(a, b);
        (chart, coord(a, chart).unwrap_or_default(), coord(b, chart).unwrap_or_default())
    }

    /// Nearest point of edge `i` to `p`, with its chordal distance.
    pub fn closest_on_edge(&self, i: usize, p: SpherePoint) -> (SpherePoint, f64) {
        let (chart, a, b) = self.edge(i);
        let q = match coord(p, chart) {
            Some(w) => from_coord(closest_on_segment(a, b, w), chart),
            // p is the point at infinity of this chart: the nearer endpoint is close enough.
            None => {
                let (x, y) = (self.vertices[i], self.vertices[i + 1]);
                if chordal_distance(x, p) <= chordal_distance(y, p) { x } else { y }
            }
        };
        (q, chordal_distance(p, q))
    }

    /// Chordal distance from `p` to the polyline, with the nearest edge.
    pub fn nearest_edge(&self, p: SpherePoint) -> (usize, f64) {
        (0..self.segment_count())
            .map(|i| (i, self.closest_on_edge(i, p).1))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    pub fn distance_to(&self, p: SpherePoint) -> f64 {
        self.nearest_edge(p).1
    }

    /// Symmetric Hausdorff distance, sampled at vertices and edge midpoints.
    pub fn hausdorff(&self, other: &Curve) -> f64 {
        let directed = |a: &Curve, b: &Curve| -> f64 {
            let mut worst: f64 = 0.0;
            for i in 0..a.segment_count() {
                worst = worst.max(b.distance_to(a.vertices[i]));
                worst = worst.max(b.distance_to(a.point_at(i as f64 + 0.5)));
            }
            worst.max(b.distance_to(a.end()))
        };
        directed(self, other).max(directed(other, self))
    }

    /// Points where non-adjacent edges meet.
    pub fn self_intersections(&self) -> Vec<SpherePoint> {
        let n = self.segment_count();
        let closed = self.is_closed();
        let adjacent = move |i: usize, j: usize| i.abs_diff(j) <= 1 || (closed && i.min(j) == 0 && i.max(j) == n - 1);
        let segs: Vec<(usize, usize)> = (0..n).map(|i| (0, i)).collect();
        let hits = arrangement(&[self], &segs, |(_, i), (_, j)| i >= j || adjacent(i, j));
        dedup_sphere(hits.into_iter().map(|(_, _, p)| p).collect())
    }

    pub fn is_simple(&self) -> bool {
        self.self_intersections().is_empty()
    }

    /// Distinct points shared by the two curves.
    pub fn intersections(&self, other: &Curve) -> Vec<SpherePoint> {
        let mut segs: Vec<(usize, usize)> = (0..self.segment_count()).map(|i| (0, i)).collect();
        segs.extend((0..other.segment_count()).map(|j| (1, j)));
        let hits = arrangement(&[self, other], &segs, |(ca, _), (cb, _)| ca == cb);
        dedup_sphere(hits.into_iter().map(|(_, _, p)| p).collect())
    }
}

fn refine_edge(a: SpherePoint, b: SpherePoint, max_edge: f64, depth: usize, out: &mut Vec<SpherePoint>) {
    if depth >= MAX_BISECTIONS || chordal_distance(a, b) <= max_edge {
        out.push(b);
        return;
    }
    let m = interpolate(a, b, 0.5);
    refine_edge(a, m, max_edge, depth + 1, out);
    refine_edge(m, b, max_edge, depth + 1, out);
}

/// Merges sphere points closer than 1e-9.
pub fn dedup_sphere(points: Vec<SpherePoint>) -> Vec<SpherePoint> {
    let mut out: Vec<SpherePoint> = Vec::new();
    for p in points {
        if !out.iter().any(|q| chordal_distance(p, *q) < 1e-9) {
            out.push(p);
        }
    }
    out
}

/// Two edges, as (curve index, edge index), and the point where they cross.
pub type Crossing = ((usize, usize), (usize, usize), SpherePoint);

/// Crossings among the edges `segs` (curve index, edge index) of `curves`.
/// Each crossing is reported once per chart pass in which it is seen, as
/// `(edge a, edge b, point)` with `a` before `b` in `segs`; `skip` drops
/// pairs. Both charts are swept, each with the edges that stay within
/// modulus [`PASS_BOUND`] there.
pub fn arrangement(
    curves: &[&Curve],
    segs: &[(usize, usize)],
    skip: impl Fn((usize, usize), (usize, usize)) -> bool,
) -> Vec<Crossing> {
    let mut out = Vec::new();
    for chart in [Chart::Plane, Chart::Inverted] {
        let mut ids = Vec::new();
        let mut coords = Vec::new();
        for (k, &(c, i)) in segs.iter().enumerate() {
            let v = &curves[c].vertices;
            if let (Some(a), Some(b)) = (coord(v[i], chart), coord(v[i + 1], chart)) {
                if a.norm() <= PASS_BOUND && b.norm() <= PASS_BOUND {
                    ids.push(k);
                    coords.push((a, b));
                }
            }
        }
        let hits = segment_intersections(&coords, &coords, |x, y| {
            x >= y || skip(segs[ids[x]], segs[ids[y]])
        });
        for (x, y, p) in hits {
            out.push((segs[ids[x]], segs[ids[y]], from_coord(p, chart)));
        }
    }
    out
}
