//! A two-chart pixel grid covering the whole sphere: one square in the `z`
//! plane and one in the `u = 1/z` plane, glued by cross links between
//! pixels whose centers correspond.

use num_complex::Complex64;

use crate::maps::{Chart, ChartPoint};
use crate::sphere::{recip, Finite, Infinity, SpherePoint};

/// Half side length of each chart square.
pub const CHART_HALF_WIDTH: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereGrid {
    pub resolution: usize,
    pub half_width: f64,
}

impl SphereGrid {
    pub fn new(resolution: usize) -> Self {
        Self { resolution, half_width: CHART_HALF_WIDTH }
    }

    pub fn len(&self) -> usize {
        2 * self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        self.resolution == 0
    }

    pub fn pixel_size(&self) -> f64 {
        2.0 * self.half_width / self.resolution as f64
    }

    pub fn chart_of(&self, idx: usize) -> Chart {
        if idx < self.resolution * self.resolution {
            Chart::Plane
        } else {
            Chart::Inverted
        }
    }

    fn split(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.resolution;
        (idx / (n * n), (idx % (n * n)) / n, idx % n)
    }

    fn join(&self, chart: usize, row: usize, col: usize) -> usize {
        let n = self.resolution;
        chart * n * n + row * n + col
    }

    /// Pixel center as a chart coordinate.
    pub fn center(&self, idx: usize) -> ChartPoint {
        let (chart, row, col) = self.split(idx);
        let h = self.pixel_size();
        let w = Complex64::new(-self.half_width + (col as f64 + 0.5) * h, self.half_width - (row as f64 + 0.5) * h);
        ChartPoint { chart: if chart == 0 { Chart::Plane } else { Chart::Inverted }, w }
    }

    /// The pixel of `chart` containing the coordinate `w`, if inside the square.
    pub fn locate_in(&self, chart: Chart, w: Complex64) -> Option<usize> {
        let h = self.pixel_size();
        let col = ((w.re + self.half_width) / h).floor();
        let row = ((self.half_width - w.im) / h).floor();
        let n = self.resolution as f64;
        if !(col >= 0.0 && col < n && row >= 0.0 && row < n) {
            return None;
        }
        let c = if chart == Chart::Plane { 0 } else { 1 };
        Some(self.join(c, row as usize, col as usize))
    }

    /// The pixel containing `p`, preferring the plane chart.
    pub fn locate(&self, p: SpherePoint) -> usize {
        match p {
            Finite(z) => self
                .locate_in(Chart::Plane, z)
                .or_else(|| self.locate_in(Chart::Inverted, recip(z)))
                .expect("the two chart squares cover the sphere"),
            Infinity => self.locate_in(Chart::Inverted, Complex64::new(0.0, 0.0)).unwrap(),
        }
    }

    /// 4-neighbors within the chart.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (chart, row, col) = self.split(idx);
        let n = self.resolution;
        let cand = [
            (row > 0).then(|| (row - 1, col)),
            (row + 1 < n).then(|| (row + 1, col)),
            (col > 0).then(|| (row, col - 1)),
            (col + 1 < n).then(|| (row, col + 1)),
        ];
        cand.into_iter().flatten().map(move |(r, c)| self.join(chart, r, c))
    }

    /// The pixel of the other chart containing this pixel's center, if any.
    pub fn cross_link(&self, idx: usize) -> Option<usize> {
        let cp = self.center(idx);
        let other = match cp.chart {
            Chart::Plane => Chart::Inverted,
            Chart::Inverted => Chart::Plane,
        };
        let (w, _) = cp.in_chart(other);
        self.locate_in(other, w)
    }
}

/// Disjoint-set forest with path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins so labels are deterministic.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Connected components of the pixels accepted by `key`, where adjacent
/// pixels join when their keys are equal. Returns per-pixel component ids
/// (numbered densely in pixel order) and the component count.
pub fn label_components<K: PartialEq + Copy>(
    grid: &SphereGrid,
    keys: &[Option<K>],
    link_ok: impl Fn(usize) -> bool,
) -> (Vec<Option<u32>>, usize) {
    let mut uf = UnionFind::new(grid.len());
    for idx in 0..grid.len() {
        let Some(k) = keys[idx] else { continue };
        for nb in grid.neighbors(idx) {
            if nb > idx && keys[nb] == Some(k) {
                uf.union(idx, nb);
            }
        }
        if link_ok(idx) {
            if let Some(nb) = grid.cross_link(idx) {
                if keys[nb] == Some(k) && link_ok(nb) {
                    uf.union(idx, nb);
                }
            }
        }
    }
    let mut ids = vec![u32::MAX; grid.len()];
    let mut next = 0u32;
    let mut labels = vec![None; grid.len()];
    for idx in 0..grid.len() {
        if keys[idx].is_none() {
            continue;
        }
        let r = uf.find(idx);
        if ids[r] == u32::MAX {
            ids[r] = next;
            next += 1;
        }
        labels[idx] = Some(ids[r]);
    }
    (labels, next as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_and_center_roundtrip() {
        let g = SphereGrid::new(64);
        for idx in [0, 17, 64 * 64 - 1, 64 * 64, g.len() - 1] {
            let cp = g.center(idx);
            assert_eq!(g.locate_in(cp.chart, cp.w), Some(idx));
        }
        let inf = g.locate(Infinity);
        assert_eq!(g.chart_of(inf), Chart::Inverted);
        assert_eq!(g.chart_of(g.locate(SpherePoint::real(0.2))), Chart::Plane);
        assert_eq!(g.chart_of(g.locate(SpherePoint::real(20.0))), Chart::Inverted);
    }

    #[test]
    fn whole_grid_is_one_component() {
        let g = SphereGrid::new(64);
        let keys = vec![Some(0u8); g.len()];
        let (_, n) = label_components(&g, &keys, |_| true);
        assert_eq!(n, 1);
    }

    #[test]
    fn unit_circle_splits_sphere() {
        let g = SphereGrid::new(64);
        let keys: Vec<Option<u8>> = (0..g.len())
            .map(|i| {
                let p = g.center(i).to_sphere();
                let r = p.finite().map(|z| z.norm()).unwrap_or(f64::INFINITY);
                Some((r < 1.0) as u8)
            })
            .collect();
        let (_, n) = label_components(&g, &keys, |_| true);
        assert_eq!(n, 2);
    }
}
