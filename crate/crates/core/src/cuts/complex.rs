use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::curve::{arrangement, dedup_sphere, Curve};
use super::family::CutFamily;
use super::pullback::{critical_data, CRITICAL_VALUE_TOL};
use super::CutError;
use crate::maps::{ChartPoint, QuadraticRationalMap};
use crate::sphere::{chordal_distance, SpherePoint};

/// Jacobian `|f'|^2` (in charts) below which an orientation sample is discarded.
const JACOBIAN_TOL: f64 = 1e-12;

/// One of the two prime-end sides of an arc: `Plus` is on the left when
/// the arc is traversed from its first vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcRecord {
    pub level: usize,
    pub index: usize,
    pub parent: Option<usize>,
    pub endpoints: [SpherePoint; 2],
    pub closed: bool,
    pub sides: [Side; 2],
    /// Vertices of the arc lying on a critical value.
    pub critical_value_incidences: Vec<usize>,
    /// Arcs at the next level whose parent this is (when built).
    pub children: Option<usize>,
    /// Child count predicted by the doubling rule, where it applies.
    pub expected_children: Option<usize>,
}

/// Where the sides of an edge range of a child arc go on its parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideTransition {
    pub level: usize,
    pub index: usize,
    /// First and last edge (inclusive) of the range.
    pub edges: [usize; 2],
    pub plus_to: Side,
    pub minus_to: Side,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub arc_count: usize,
    /// Distinct points where two different arcs of the level meet.
    pub intersection_count: usize,
    pub self_intersection_count: usize,
    /// Whether every parent at the level below has the predicted child count.
    pub doubling_rule_holds: bool,
}

/// Finite-level model of the sphere with cuts: arcs with two sides each,
/// and the side maps induced by the map from each level to the one below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutComplex {
    pub arcs: Vec<ArcRecord>,
    pub transitions: Vec<SideTransition>,
    pub stats: Vec<LevelStats>,
    /// Distinct points where arcs of different levels meet.
    pub cross_level_intersections: usize,
    /// All arcs at all levels are simple and pairwise disjoint.
    pub disjoint: bool,
}

/// Children predicted for an arc, given the vertices where it meets
/// critical values: each piece between consecutive incidences lifts to two
/// arcs when it avoids critical values and to one arc when one or both of
/// its ends are critical values. `None` for closed arcs without incidences,
/// whose lift depends on winding.
fn expected_children(curve: &Curve, incidences: &[usize]) -> Option<usize> {
    let last = curve.vertices.len() - 1;
    let closed = curve.is_closed();
    if closed && incidences.is_empty() {
        return None;
    }
    let interior = incidences.iter().filter(|&&i| i > 0 && i < last).count();
    if closed {
        // Cut at k points: k pieces, each with two critical ends.
        let k = interior + usize::from(incidences.contains(&0));
        return Some(k);
    }
    let pieces = interior + 1;
    let ends = usize::from(incidences.contains(&0)) + usize::from(incidences.contains(&last));
    // Pieces touching a critical value at either end lift to one arc; with
    // an interior incidence every piece touches one.
    let touching = if pieces == 1 { usize::from(ends > 0) } else { pieces };
    let free = pieces - touching;
    Some(2 * free + touching)
}

/// Orientation of the image of edge `edge` of `child` under `f^iterations`,
/// relative to the nearest edge of `target`: `Some(Plus)` when the image
/// runs along `target`'s direction, so the left side goes to the left.
/// `None` when the Jacobian is too small at the edge midpoint.
pub fn edge_side_map(
    m: &QuadraticRationalMap,
    iterations: usize,
    child: &Curve,
    edge: usize,
    target: &Curve,
) -> Option<Side> {
    edge_side_map_near(m, iterations, child, edge, target, None).map(|(s, _)| s)
}

fn edge_side_map_near(
    m: &QuadraticRationalMap,
    iterations: usize,
    child: &Curve,
    edge: usize,
    target: &Curve,
    hint: Option<usize>,
) -> Option<(Side, usize)> {
    let (chart, a, b) = child.edge(edge);
    let mut cp = ChartPoint { chart, w: (a + b) * 0.5 };
    let mut tangent = b - a;
    for _ in 0..iterations {
        let (next, d) = m.step_chart(cp);
        if !(d.norm_sqr() >= JACOBIAN_TOL) {
            return None;
        }
        tangent *= d;
        cp = next;
    }
    let q = cp.to_sphere();
    let j = nearest_edge_from(target, q, hint);
    let (tc, ta, tb) = target.edge(j);
    let t = if tc == cp.chart { tangent } else { tangent * cp.in_chart(tc).1 };
    let dir: Complex64 = tb - ta;
    let s = (t * dir.conj()).re;
    if !s.is_finite() || s == 0.0 {
        return None;
    }
    Some((if s > 0.0 { Side::Plus } else { Side::Minus }, j))
}

/// Nearest edge of `target` to `q`, trying a window around `hint` first.
fn nearest_edge_from(target: &Curve, q: SpherePoint, hint: Option<usize>) -> usize {
    if let Some(h) = hint {
        let lo = h.saturating_sub(3);
        let hi = (h + 3).min(target.segment_count() - 1);
        let (j, d) = (lo..=hi)
            .map(|i| (i, target.closest_on_edge(i, q).1))
            .fold((h, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        if d < 1e-7 {
            return j;
        }
    }
    target.nearest_edge(q).0
}

/// Side transitions of `child` onto `parent`, grouped into maximal edge
/// ranges with the same orientation.
fn transitions_for(
    m: &QuadraticRationalMap,
    level: usize,
    index: usize,
    child: &Curve,
    parent: &Curve,
) -> Result<Vec<SideTransition>, CutError> {
    let mut signs: Vec<Option<Side>> = Vec::with_capacity(child.segment_count());
    let mut hint = None;
    for e in 0..child.segment_count() {
        match edge_side_map_near(m, 1, child, e, parent, hint) {
            Some((s, j)) => {
                signs.push(Some(s));
                hint = Some(j);
            }
            None => signs.push(None),
        }
    }
    let Some(first) = signs.iter().flatten().next().copied() else {
        return Err(CutError::DegenerateOrientation { level, index });
    };
    let mut out: Vec<SideTransition> = Vec::new();
    let mut current = first;
    for (e, s) in signs.into_iter().enumerate() {
        let s = s.unwrap_or(current);
        match out.last_mut() {
            Some(t) if t.plus_to == s => t.edges[1] = e,
            _ => out.push(SideTransition { level, index, edges: [e, e], plus_to: s, minus_to: s.flip() }),
        }
        current = s;
    }
    Ok(out)
}

pub fn build_cut_complex(cf: &CutFamily) -> Result<CutComplex, CutError> {
    let m = &cf.map;
    let (_, values) = critical_data(m)?;
    let mut arcs = Vec::new();
    let mut transitions = Vec::new();
    for (level, row) in cf.levels.iter().enumerate() {
        for arc in row {
            let cv = &arc.curve;
            let incidences: Vec<usize> = (0..cv.vertices.len())
                .filter(|&i| values.iter().any(|v| chordal_distance(cv.vertices[i], *v) < CRITICAL_VALUE_TOL))
                .collect();
            let children = cf
                .levels
                .get(level + 1)
                .map(|next| next.iter().filter(|a| a.parent == Some(arc.index)).count());
            arcs.push(ArcRecord {
                level,
                index: arc.index,
                parent: arc.parent,
                endpoints: [cv.start(), cv.end()],
                closed: cv.is_closed(),
                sides: [Side::Plus, Side::Minus],
                expected_children: expected_children(cv, &incidences),
                critical_value_incidences: incidences,
                children,
            });
            if let Some(p) = arc.parent {
                let parent = &cf.levels[level - 1][p].curve;
                transitions.extend(transitions_for(m, level, arc.index, cv, parent)?);
            }
        }
    }

    // One sweep over every edge of every arc.
    let curves: Vec<&Curve> = cf.arcs().map(|a| &a.curve).collect();
    let owner: Vec<(usize, usize)> = cf.arcs().map(|a| (a.level, a.index)).collect();
    let segs: Vec<(usize, usize)> = curves
        .iter()
        .enumerate()
        .flat_map(|(c, cv)| (0..cv.segment_count()).map(move |i| (c, i)))
        .collect();
    let closed: Vec<bool> = curves.iter().map(|c| c.is_closed()).collect();
    let hits = arrangement(&curves, &segs, |(ca, i), (cb, j)| {
        let n = curves[ca].segment_count();
        ca == cb && (i.abs_diff(j) <= 1 || (closed[ca] && i.min(j) == 0 && i.max(j) == n - 1))
    });
    let levels = cf.levels.len();
    let mut within: Vec<Vec<SpherePoint>> = vec![Vec::new(); levels];
    let mut selfs: Vec<Vec<SpherePoint>> = vec![Vec::new(); levels];
    let mut cross = Vec::new();
    for ((ca, _), (cb, _), p) in hits {
        let (la, lb) = (owner[ca].0, owner[cb].0);
        if ca == cb {
            selfs[la].push(p);
        } else if la == lb {
            within[la].push(p);
        } else {
            cross.push(p);
        }
    }
    let stats: Vec<LevelStats> = (0..levels)
        .map(|level| {
            let doubling_rule_holds = level == 0
                || arcs
                    .iter()
                    .filter(|a| a.level == level - 1)
                    .all(|a| a.expected_children.is_none_or(|e| a.children == Some(e)));
            LevelStats {
                level,
                arc_count: cf.levels[level].len(),
                intersection_count: dedup_sphere(std::mem::take(&mut within[level])).len(),
                self_intersection_count: dedup_sphere(std::mem::take(&mut selfs[level])).len(),
                doubling_rule_holds,
            }
        })
        .collect();
    let cross_level_intersections = dedup_sphere(cross).len();
    let disjoint = cross_level_intersections == 0
        && stats.iter().all(|s| s.intersection_count == 0 && s.self_intersection_count == 0);
    Ok(CutComplex { arcs, transitions, stats, cross_level_intersections, disjoint })
}

impl CutComplex {
    /// Where the given side of edge `edge` of arc `(level, index)` goes on the parent.
    pub fn side_image(&self, level: usize, index: usize, edge: usize, side: Side) -> Option<Side> {
        self.transitions
            .iter()
            .find(|t| t.level == level && t.index == index && t.edges[0] <= edge && edge <= t.edges[1])
            .map(|t| match side {
                Side::Plus => t.plus_to,
                Side::Minus => t.minus_to,
            })
    }

    pub fn arc_counts(&self) -> Vec<usize> {
        self.stats.iter().map(|s| s.arc_count).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuts::{build_cut_family, initial_cut};
    use crate::maps::family_member;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square_family(depth: usize) -> CutFamily {
        let m = family_member(1, c(0., 0.)).unwrap().map;
        let z = initial_cut(&m, &Curve::segment(c(0., 0.), c(1., 0.)).unwrap()).unwrap();
        build_cut_family(&m, &z, depth).unwrap()
    }

    #[test]
    fn depth_zero_complex() {
        let cc = build_cut_complex(&square_family(0)).unwrap();
        assert_eq!(cc.arcs.len(), 1);
        assert_eq!(cc.arcs[0].sides, [Side::Plus, Side::Minus]);
        assert!(cc.transitions.is_empty());
    }

    #[test]
    fn plus_sign_is_not_disjoint() {
        let cc = build_cut_complex(&square_family(1)).unwrap();
        assert_eq!(cc.stats[1].intersection_count, 1);
        assert!(!cc.disjoint);
        assert!(cc.stats[1].doubling_rule_holds);
    }

    #[test]
    fn merged_arc_has_two_side_ranges() {
        let cc = build_cut_complex(&square_family(1)).unwrap();
        // Each level-1 arc runs through the critical point, so its two halves
        // map onto the parent with opposite orientations.
        for index in 0..2 {
            let ts: Vec<_> = cc.transitions.iter().filter(|t| t.level == 1 && t.index == index).collect();
            assert_eq!(ts.len(), 2);
            assert_ne!(ts[0].plus_to, ts[1].plus_to);
        }
    }

    #[test]
    fn doubling_rule_examples() {
        let seg = Curve::segment(c(1., 0.), c(2., 0.)).unwrap();
        let last = seg.vertices.len() - 1;
        assert_eq!(expected_children(&seg, &[]), Some(2));
        assert_eq!(expected_children(&seg, &[0]), Some(1));
        assert_eq!(expected_children(&seg, &[0, last]), Some(1));
        assert_eq!(expected_children(&seg, &[5]), Some(2));
        assert_eq!(expected_children(&seg, &[0, 5]), Some(2));
        assert_eq!(expected_children(&seg, &[3, 5]), Some(3));
    }
}
