use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use num_complex::Complex64;
use rayon::prelude::*;

use super::cycle::{detect_cycle, Cycle};
use super::ClassifyError;
use crate::maps::{ChartPoint, QuadraticRationalMap};
use crate::raster::{label_components, SphereGrid};
use crate::sphere::SpherePoint;

/// Chordal radius around a cycle point counted as "arrived".
pub const PIXEL_EPS: f64 = 1e-3;
/// Iteration budget per pixel.
pub const PIXEL_MAX_ITER: usize = 2_000;
/// Chart radius whose pullback along the orbit bounds the certified disk.
const CONFIRM_RADIUS: f64 = 1e-2;

/// Outcome of a single-component search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentSearch {
    /// A pixel of a primary cycle point was reached.
    pub reached: bool,
    /// Pixels admitted to the component before stopping.
    pub visited: usize,
    /// Some neighbor of a visited pixel failed to converge or certify.
    pub touches_unconverged: bool,
}

/// Decides, pixel by pixel, which attractor a point converges to and in
/// which phase. Two points get the same key exactly when they converge to
/// the same attractor and are attracted to the same cycle point under the
/// period-th iterate.
#[derive(Debug, Clone)]
pub struct PixelClassifier {
    map: QuadraticRationalMap,
    attractors: Vec<Cycle>,
    eps: f64,
    max_iter: usize,
}

impl PixelClassifier {
    /// Uses `primary` plus every other attracting cycle found from the
    /// critical orbits (a degree-2 map has at most two).
    pub fn new(map: &QuadraticRationalMap, primary: &Cycle, max_iter: usize) -> Self {
        let mut attractors = vec![primary.clone()];
        let (c1, c2) = map.marked();
        for c in [c1, c2] {
            if let Ok(Some(cy)) = detect_cycle(map, c, max_iter.max(1000), 1e-10) {
                if cy.is_attracting() && !attractors.iter().any(|a| a.same_as(&cy, 1e-6)) {
                    attractors.push(cy);
                }
            }
        }
        Self { map: *map, attractors, eps: PIXEL_EPS, max_iter }
    }

    pub fn attractors(&self) -> &[Cycle] {
        &self.attractors
    }

    /// `attractor * 64 + phase`, or `None` if nothing is reached or the
    /// start is not certified to be at least `clearance` (in its chart)
    /// away from the Julia set.
    ///
    /// The clearance estimate is `CONFIRM_RADIUS / |(f^n)'|` at the first
    /// arrival time `n`: nearby points whose orbits separate before arriving
    /// lie near the Julia set.
    pub fn key(&self, start: ChartPoint, clearance: f64) -> Option<u32> {
        let mut cp = start;
        let mut deriv = Complex64::new(1.0, 0.0);
        for n in 0..=self.max_iter {
            let z = cp.to_sphere();
            for (a, cy) in self.attractors.iter().enumerate() {
                let (i, d) = cy.nearest(z);
                if d < self.eps {
                    if n > 0 && CONFIRM_RADIUS < clearance * deriv.norm() {
                        return None;
                    }
                    let p = cy.period;
                    let phase = (i + p - n % p) % p;
                    return Some((a * 64 + phase) as u32);
                }
            }
            let (next, d) = self.map.step_chart(cp);
            deriv *= d;
            cp = next;
        }
        None
    }

    /// Estimated chart distance from `p` to the Julia set, measured in the
    /// natural chart of `p`; `None` if `p` does not converge.
    pub fn clearance_at(&self, p: SpherePoint) -> Option<f64> {
        let mut cp = ChartPoint::natural(p);
        let mut deriv = Complex64::new(1.0, 0.0);
        for _ in 0..=self.max_iter {
            let z = cp.to_sphere();
            if self.attractors.iter().any(|cy| cy.nearest(z).1 < self.eps) {
                return Some(CONFIRM_RADIUS / deriv.norm());
            }
            let (next, d) = self.map.step_chart(cp);
            deriv *= d;
            cp = next;
        }
        None
    }

    /// Clearance required of a pixel: adjacent centers, and centers linked
    /// across charts, must fall inside the certified disk.
    pub fn clearance(grid: &SphereGrid) -> f64 {
        2.0 * grid.pixel_size()
    }

    /// Attractor index of a key.
    pub fn attractor_of(key: u32) -> usize {
        (key / 64) as usize
    }

    /// Whether the raster component of `start` contains a pixel of a point
    /// of the primary cycle; `None` when the pixel of `start` does not
    /// converge. Explores only the component of `start`, best-first toward
    /// the nearest cycle point, so it agrees with the full labeling of
    /// [`basin_label`] at the same resolution.
    pub fn component_reaches_cycle(&self, grid: &SphereGrid, start: SpherePoint) -> Option<bool> {
        self.explore_component(grid, start).map(|s| s.reached)
    }

    /// As [`Self::component_reaches_cycle`], with search statistics.
    pub fn explore_component(&self, grid: &SphereGrid, start: SpherePoint) -> Option<ComponentSearch> {
        self.explore_component_with(grid, start, Self::clearance(grid))
    }

    /// As [`Self::explore_component`] with an explicit clearance; zero
    /// clearance links any two converged pixels with equal keys.
    pub fn explore_component_with(
        &self,
        grid: &SphereGrid,
        start: SpherePoint,
        clearance: f64,
    ) -> Option<ComponentSearch> {
        let primary = &self.attractors[0];
        let targets: Vec<usize> = primary.points.iter().map(|p| grid.locate(*p)).collect();
        let start_idx = grid.locate(start);
        let mut memo: HashMap<usize, Option<u32>> = HashMap::new();
        let key_of = |idx: usize, memo: &mut HashMap<usize, Option<u32>>| -> Option<u32> {
            *memo.entry(idx).or_insert_with(|| self.key(grid.center(idx), clearance))
        };
        let k0 = key_of(start_idx, &mut memo)?;
        let priority = |idx: usize| -> f64 { primary.nearest(grid.center(idx).to_sphere()).1 };

        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> Ordering {
                // Min-heap on distance, ties by index.
                other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
            }
        }

        let mut touches_unconverged = false;
        let mut seen = std::collections::HashSet::new();
        let mut heap = BinaryHeap::new();
        seen.insert(start_idx);
        heap.push(Item(priority(start_idx), start_idx));
        while let Some(Item(_, idx)) = heap.pop() {
            if targets.contains(&idx) {
                return Some(ComponentSearch { reached: true, visited: seen.len(), touches_unconverged });
            }
            let nbs: Vec<usize> = grid.neighbors(idx).chain(grid.cross_link(idx)).collect();
            for nb in nbs {
                if seen.contains(&nb) {
                    continue;
                }
                match key_of(nb, &mut memo) {
                    Some(key) if key == k0 => {
                        seen.insert(nb);
                        heap.push(Item(priority(nb), nb));
                    }
                    None => touches_unconverged = true,
                    Some(_) => {}
                }
            }
        }
        Some(ComponentSearch { reached: false, visited: seen.len(), touches_unconverged })
    }
}

/// Raster labeling of the basins of attraction over the whole sphere.
#[derive(Debug, Clone)]
pub struct BasinRaster {
    pub grid: SphereGrid,
    /// Component id per pixel; `None` for pixels that did not converge.
    pub labels: Vec<Option<u32>>,
    pub keys: Vec<Option<u32>>,
    pub component_count: usize,
    /// The primary cycle first, then any other attracting cycles.
    pub attractors: Vec<Cycle>,
    /// Components containing a point of the primary cycle.
    pub cycle_components: Vec<u32>,
    /// Components containing a point of each attractor, in attractor order.
    pub attractor_components: Vec<Vec<u32>>,
    pub note: &'static str,
}

impl BasinRaster {
    pub fn component_at(&self, p: SpherePoint) -> Option<u32> {
        self.labels[self.grid.locate(p)]
    }

    pub fn in_cycle_component(&self, p: SpherePoint) -> Option<bool> {
        self.component_at(p).map(|c| self.cycle_components.contains(&c))
    }
}

pub fn basin_label(map: &QuadraticRationalMap, cycle: &Cycle, resolution: usize) -> Result<BasinRaster, ClassifyError> {
    basin_label_with(map, cycle, resolution, PIXEL_MAX_ITER)
}

pub fn basin_label_with(
    map: &QuadraticRationalMap,
    cycle: &Cycle,
    resolution: usize,
    max_iter: usize,
) -> Result<BasinRaster, ClassifyError> {
    if !cycle.is_attracting() {
        return Err(ClassifyError::NotAttracting(cycle.multiplier.norm()));
    }
    if resolution == 0 {
        return Err(ClassifyError::InvalidArgument("resolution must be positive".into()));
    }
    let grid = SphereGrid::new(resolution);
    let classifier = PixelClassifier::new(map, cycle, max_iter);
    let clearance = PixelClassifier::clearance(&grid);
    let keys: Vec<Option<u32>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| classifier.key(grid.center(idx), clearance))
        .collect();
    let (labels, component_count) = label_components(&grid, &keys, |_| true);
    let attractor_components: Vec<Vec<u32>> = classifier
        .attractors()
        .iter()
        .map(|cy| {
            let mut comps: Vec<u32> = cy.points.iter().filter_map(|p| labels[grid.locate(*p)]).collect();
            comps.sort_unstable();
            comps.dedup();
            comps
        })
        .collect();
    Ok(BasinRaster {
        grid,
        labels,
        keys,
        component_count,
        attractors: classifier.attractors().to_vec(),
        cycle_components: attractor_components[0].clone(),
        attractor_components,
        note: "immediate basin approximated by raster components; accuracy limited by resolution near the Julia set",
    })
}
