use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::maps::{ChartPoint, QuadraticRationalMap};
use crate::sphere::{chordal_distance, SpherePoint};

/// Longest period searched for by [`detect_cycle`].
pub const MAX_PERIOD: usize = 64;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Cycle points closer than this to a critical point are snapped onto it.
const CRITICAL_SNAP: f64 = 1e-12;

/// A periodic orbit with its multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub points: Vec<SpherePoint>,
    pub period: usize,
    pub multiplier: Complex64,
}

impl Cycle {
    pub fn is_superattracting(&self) -> bool {
        self.multiplier == Complex64::new(0.0, 0.0)
    }

    pub fn is_attracting(&self) -> bool {
        self.multiplier.norm() < 1.0
    }

    /// Chordal distance from `p` to the nearest cycle point, with its index.
    pub fn nearest(&self, p: SpherePoint) -> (usize, f64) {
        self.points
            .iter()
            .enumerate()
            .map(|(i, q)| (i, chordal_distance(p, *q)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    /// Whether `other` is the same cycle (as a set) within `tol`.
    pub fn same_as(&self, other: &Cycle, tol: f64) -> bool {
        self.period == other.period && other.points.iter().all(|p| self.nearest(*p).1 < tol)
    }

    /// Number of the map's critical points lying on the cycle.
    pub fn critical_count(&self, map: &QuadraticRationalMap) -> usize {
        let (c1, c2) = map.marked();
        [c1, c2].iter().filter(|c| self.nearest(**c).1 < CRITICAL_SNAP).count()
    }
}

/// `f^p` from the chart of `start`, re-expressed in that chart, with its
/// derivative.
fn return_map(map: &QuadraticRationalMap, start: ChartPoint, period: usize) -> (Complex64, Complex64) {
    let mut cp = start;
    let mut deriv = Complex64::new(1.0, 0.0);
    for _ in 0..period {
        let (next, d) = map.step_chart(cp);
        deriv *= d;
        cp = next;
    }
    let (w, dt) = cp.in_chart(start.chart);
    (w, deriv * dt)
}

/// Multiplier of the cycle through `points` (in orbit order), computed from
/// chart derivatives so that no factor is evaluated at infinity.
pub fn cycle_multiplier(map: &QuadraticRationalMap, start: SpherePoint, period: usize) -> Complex64 {
    return_map(map, ChartPoint::natural(start), period).1
}

/// Iterates `seed` looking for a near-return within `tol` at some period up
/// to [`MAX_PERIOD`], then refines the cycle by Newton's method on the
/// return map. Returns `Ok(None)` when nothing is detected in `max_iter`
/// steps.
pub fn detect_cycle(
    map: &QuadraticRationalMap,
    seed: SpherePoint,
    max_iter: usize,
    tol: f64,
) -> Result<Option<Cycle>, ClassifyError> {
    if !(tol > 0.0) {
        return Err(ClassifyError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut history: Vec<SpherePoint> = Vec::with_capacity(MAX_PERIOD + 1);
    let mut cp = ChartPoint::natural(seed);
    history.push(seed);
    for _ in 0..max_iter {
        cp = map.step_chart(cp).0;
        let z = cp.to_sphere();
        let found = (1..=MAX_PERIOD.min(history.len()))
            .find(|&p| chordal_distance(z, history[history.len() - p]) < tol);
        if let Some(period) = found {
            let unrefined: Vec<SpherePoint> = history[history.len() - period..].to_vec();
            return refine(map, z, period, unrefined).map(Some);
        }
        if history.len() > MAX_PERIOD {
            history.remove(0);
        }
        history.push(z);
    }
    Ok(None)
}

fn refine(
    map: &QuadraticRationalMap,
    near: SpherePoint,
    period: usize,
    unrefined: Vec<SpherePoint>,
) -> Result<Cycle, ClassifyError> {
    let fail = |unrefined: Vec<SpherePoint>| ClassifyError::RefinementFailed { period, near, unrefined };
    let start = ChartPoint::natural(near);
    let mut u = start.w;
    let mut converged = false;
    for _ in 0..60 {
        let (w, d) = return_map(map, ChartPoint { chart: start.chart, w: u }, period);
        let g = w - u;
        let dg = d - 1.0;
        if g.norm() == 0.0 {
            converged = true;
            break;
        }
        let step = g / dg;
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Err(fail(unrefined));
        }
        u -= step;
        if step.norm() <= 1e-15 * (1.0 + u.norm()) {
            converged = true;
            break;
        }
    }
    let first = ChartPoint { chart: start.chart, w: u };
    let residual = chordal_distance(return_map(map, first, period).0.into(), u.into());
    if !converged && !(residual < 1e-12) {
        return Err(fail(unrefined));
    }
    if !(residual < 1e-9) {
        return Err(fail(unrefined));
    }

    // A near-return at period p may refine onto a cycle of smaller period.
    let period = (1..=period)
        .filter(|d| period.is_multiple_of(*d))
        .find(|&d| chordal_distance(return_map(map, first, d).0.into(), u.into()) < 1e-9)
        .unwrap_or(period);

    let (c1, c2) = map.marked();
    let mut points = Vec::with_capacity(period);
    let mut cp = first;
    let mut snapped = false;
    for _ in 0..period {
        let mut p = cp.to_sphere();
        for c in [c1, c2] {
            if chordal_distance(p, c) < CRITICAL_SNAP {
                p = c;
                snapped = true;
            }
        }
        points.push(p);
        cp = map.step_chart(ChartPoint::natural(p)).0;
    }
    // Start at a critical point when one is on the cycle, otherwise at the
    // lexicographically smallest point.
    let lead = points
        .iter()
        .position(|p| *p == c1 || *p == c2)
        .unwrap_or_else(|| {
            (0..period)
                .min_by(|&i, &j| points[i].lex_cmp(&points[j]))
                .unwrap_or(0)
        });
    points.rotate_left(lead);
    let multiplier = if snapped {
        Complex64::new(0.0, 0.0)
    } else {
        cycle_multiplier(map, points[0], period)
    };
    Ok(Cycle { points, period, multiplier })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::family_member;
    use crate::sphere::Infinity;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basilica_cycle() {
        let m = family_member(1, c(-1., 0.)).unwrap().map;
        let cy = detect_cycle(&m, SpherePoint::real(0.1), DEFAULT_MAX_ITER, 1e-9).unwrap().unwrap();
        assert_eq!(cy.period, 2);
        assert_eq!(cy.multiplier, c(0., 0.));
        assert_eq!(cy.points[0], SpherePoint::real(0.0));
        assert!(chordal_distance(cy.points[1], SpherePoint::real(-1.0)) < 1e-14);
    }

    #[test]
    fn per2_marked_cycle_from_infinity() {
        let m = family_member(2, c(2., 0.)).unwrap().map;
        let cy = detect_cycle(&m, Infinity, 100, 1e-9).unwrap().unwrap();
        assert_eq!(cy.period, 2);
        assert_eq!(cy.points, vec![Infinity, SpherePoint::real(0.0)]);
        assert_eq!(cy.multiplier, c(0., 0.));
    }

    #[test]
    fn attracting_fixed_point_of_z2_minus_half() {
        let m = family_member(1, c(-0.5, 0.)).unwrap().map;
        let cy = detect_cycle(&m, SpherePoint::real(0.0), DEFAULT_MAX_ITER, 1e-9).unwrap().unwrap();
        let fixed = (1.0 - 3f64.sqrt()) / 2.0;
        assert_eq!(cy.period, 1);
        assert!((cy.points[0].finite().unwrap() - c(fixed, 0.)).norm() < 1e-14);
        assert!((cy.multiplier - c(2.0 * fixed, 0.)).norm() < 1e-13);
    }

    #[test]
    fn nothing_detected_on_escaping_orbit_in_few_steps() {
        // 0 -> 1 -> 2 -> 5 -> ... converges to the fixed point at infinity.
        let m = family_member(1, c(1., 0.)).unwrap().map;
        assert!(detect_cycle(&m, SpherePoint::real(0.0), 2, 1e-9).unwrap().is_none());
        let cy = detect_cycle(&m, SpherePoint::real(0.0), 100, 1e-9).unwrap().unwrap();
        assert_eq!(cy.points, vec![Infinity]);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let m = family_member(1, c(0., 0.)).unwrap().map;
        assert!(detect_cycle(&m, Infinity, 10, 0.0).is_err());
    }
}
