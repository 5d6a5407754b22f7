use serde::{Deserialize, Serialize};

use super::curve::{Curve, EndpointTag, POINT_TOL};
use super::CutError;
use crate::maps::QuadraticRationalMap;
use crate::sphere::{chordal_distance, SpherePoint};

/// An endpoint this close (chordally) to a critical value is taken to be it.
pub const CRITICAL_VALUE_TOL: f64 = 1e-10;
/// Smallest parameter step of the branch continuation.
pub const MIN_PARAMETER_STEP: f64 = 1e-12;
/// Images of preimage vertices must land this close to the input curve.
pub const REPROJECTION_TOL: f64 = 1e-9;
/// Sample count of the two-to-one check run by [`initial_cut`].
pub const TWO_TO_ONE_SAMPLES: usize = 200;

/// Critical points in mark order, and their images.
pub fn critical_data(m: &QuadraticRationalMap) -> Result<([SpherePoint; 2], [SpherePoint; 2]), CutError> {
    let crit = m.critical_points()?;
    Ok((crit, crit.map(|c| m.apply(c))))
}

fn critical_index(p: SpherePoint, values: &[SpherePoint; 2]) -> Option<usize> {
    (0..2).find(|&j| chordal_distance(p, values[j]) < CRITICAL_VALUE_TOL)
}

fn preimage_tag(tag: Option<EndpointTag>) -> Option<EndpointTag> {
    tag.map(|_| EndpointTag::Preimage)
}

/// The full preimage of `gamma`: one or two curves.
///
/// The two preimage branches are followed by nearest-point continuation,
/// halving the parameter step whenever the two candidates are closer than
/// twice the step taken, or an edge would exceed the curve's refinement
/// bound. Branches that meet at a critical value endpoint are joined into a
/// single arc through the critical point. A closed curve around one
/// critical value pulls back to a single closed curve.
pub fn pullback_curve(m: &QuadraticRationalMap, gamma: &Curve) -> Result<Vec<Curve>, CutError> {
    let (crit, values) = critical_data(m)?;
    let closed = gamma.is_closed();
    let last = gamma.vertices.len() - 1;
    for (i, p) in gamma.vertices.iter().enumerate() {
        let interior = closed || (i > 0 && i < last);
        if interior && critical_index(*p, &values).is_some() {
            return Err(CutError::InteriorCriticalValue { index: i, point: *p });
        }
    }
    let start_cv = if closed { None } else { critical_index(gamma.start(), &values) };
    let end_cv = if closed { None } else { critical_index(gamma.end(), &values) };

    let first = match start_cv {
        Some(j) => [crit[j]; 2],
        None => m.preimages(gamma.start())?,
    };
    let mut branches = [vec![first[0]], vec![first[1]]];
    let mut worst: f64 = first.iter().map(|p| chordal_distance(m.apply(*p), gamma.start())).fold(0.0, f64::max);
    let n = gamma.segment_count() as f64;
    let (mut s, mut ds) = (0.0f64, 1.0f64);
    while s < n {
        let t = (s + ds).min(s.floor() + 1.0);
        let w = gamma.point_at(t);
        let b = [*branches[0].last().unwrap(), *branches[1].last().unwrap()];
        let forced = t >= n && end_cv.is_some();
        let cand = match end_cv {
            Some(j) if forced => [crit[j]; 2],
            _ => m.preimages(w)?,
        };
        let d = chordal_distance;
        let next = if d(b[0], cand[0]) + d(b[1], cand[1]) <= d(b[0], cand[1]) + d(b[1], cand[0]) {
            cand
        } else {
            [cand[1], cand[0]]
        };
        let moves = d(b[0], next[0]).max(d(b[1], next[1]));
        let coincident = d(b[0], b[1]) <= POINT_TOL;
        let ambiguous = !coincident && !forced && d(next[0], next[1]) < 2.0 * moves;
        if ambiguous || moves > gamma.max_edge {
            if ds * 0.5 < MIN_PARAMETER_STEP {
                return Err(CutError::Ambiguous { parameter: t, point: w });
            }
            ds *= 0.5;
            continue;
        }
        for (branch, p) in branches.iter_mut().zip(next) {
            worst = worst.max(d(m.apply(p), w));
            branch.push(p);
        }
        s = t;
        ds = (ds * 2.0).min(1.0);
    }
    if worst > REPROJECTION_TOL {
        return Err(CutError::Reprojection(worst));
    }

    let [b0, b1] = branches;
    let max_edge = gamma.max_edge;
    let [t0, t1] = gamma.tags.map(preimage_tag);
    let joined = |a: &[SpherePoint], b: &[SpherePoint]| -> Vec<SpherePoint> {
        let mut v = a.to_vec();
        v.extend_from_slice(&b[1..]);
        v
    };
    let rev = |v: &[SpherePoint]| -> Vec<SpherePoint> { v.iter().rev().copied().collect() };
    let curves = match (start_cv, end_cv) {
        (Some(_), Some(_)) => vec![Curve::from_refined(joined(&b0, &rev(&b1)), [None, None], max_edge)],
        (Some(_), None) => vec![Curve::from_refined(joined(&rev(&b1), &b0), [t1, t1], max_edge)],
        (None, Some(_)) => vec![Curve::from_refined(joined(&b0, &rev(&b1)), [t0, t0], max_edge)],
        (None, None) if closed => {
            let swapped = chordal_distance(*b0.last().unwrap(), b1[0]) < chordal_distance(*b0.last().unwrap(), b0[0]);
            if swapped {
                let mut v = joined(&b0, &b1);
                let l = v.len() - 1;
                v[l] = v[0];
                vec![Curve::from_refined(v, [None, None], max_edge)]
            } else {
                let close = |mut v: Vec<SpherePoint>| {
                    let l = v.len() - 1;
                    v[l] = v[0];
                    Curve::from_refined(v, [None, None], max_edge)
                };
                vec![close(b0), close(b1)]
            }
        }
        (None, None) => vec![
            Curve::from_refined(b0, [t0, t1], max_edge),
            Curve::from_refined(b1, [t0, t1], max_edge),
        ],
    };
    Ok(curves)
}

/// Largest chordal distance from the image of a vertex of `preimage` to `gamma`.
pub fn reprojection_error(m: &QuadraticRationalMap, preimage: &Curve, gamma: &Curve) -> f64 {
    preimage
        .vertices
        .iter()
        .map(|p| gamma.distance_to(m.apply(*p)))
        .fold(0.0, f64::max)
}

/// Splits `gamma` at every interior point where it meets a critical value,
/// inserting the critical value as a vertex when it lies inside an edge.
pub fn split_at_critical_values(m: &QuadraticRationalMap, gamma: &Curve) -> Result<Vec<Curve>, CutError> {
    let (_, values) = critical_data(m)?;
    let mut v: Vec<SpherePoint> = Vec::with_capacity(gamma.vertices.len() + 2);
    for i in 0..gamma.segment_count() {
        let a = gamma.vertices[i];
        v.push(critical_index(a, &values).map_or(a, |j| values[j]));
        for cv in values {
            let b = gamma.vertices[i + 1];
            let (_, dist) = gamma.closest_on_edge(i, cv);
            if dist < CRITICAL_VALUE_TOL
                && chordal_distance(a, cv) >= CRITICAL_VALUE_TOL
                && chordal_distance(b, cv) >= CRITICAL_VALUE_TOL
            {
                v.push(cv);
            }
        }
    }
    let e = gamma.end();
    v.push(critical_index(e, &values).map_or(e, |j| values[j]));

    let closed = gamma.is_closed();
    let is_cv = |p: &SpherePoint| values.contains(p);
    let mut cuts: Vec<usize> = (1..v.len() - 1).filter(|&i| is_cv(&v[i])).collect();
    if closed {
        if is_cv(&v[0]) {
            cuts.insert(0, 0);
        }
        if let Some(&c0) = cuts.first() {
            // Rotate so the curve starts and ends at the first cut.
            let mut r: Vec<SpherePoint> = v[c0..v.len() - 1].to_vec();
            r.extend_from_slice(&v[..=c0]);
            let shift = cuts[0];
            cuts = cuts.iter().skip(1).map(|&c| c - shift).collect();
            v = r;
        } else {
            return Ok(vec![gamma.clone()]);
        }
    }
    if cuts.is_empty() {
        let [s0, s1] = gamma.tags;
        let tag = |p: &SpherePoint, t| if is_cv(p) { Some(EndpointTag::CriticalValue) } else { t };
        let tags = [tag(&v[0], s0), tag(&v[v.len() - 1], s1)];
        return Ok(vec![Curve::from_refined(v, tags, gamma.max_edge)]);
    }
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(v.len() - 1);
    let n_pieces = bounds.len() - 1;
    let pieces = bounds
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let start_tag = if k == 0 && !closed { gamma.tags[0] } else { Some(EndpointTag::CriticalValue) };
            let end_tag = if k + 1 == n_pieces && !closed { gamma.tags[1] } else { Some(EndpointTag::CriticalValue) };
            Curve::from_refined(v[w[0]..=w[1]].to_vec(), [start_tag, end_tag], gamma.max_edge)
        })
        .collect();
    Ok(pieces)
}

/// Outcome of the sampling check that `m` restricted to `z` is two-to-one
/// onto `beta` except over the critical value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoToOneReport {
    pub samples: usize,
    /// Largest distance from a preimage of an interior sample to the cut.
    pub max_distance_to_cut: f64,
    /// Smallest separation between the two preimages of an interior sample.
    pub min_preimage_separation: f64,
    /// Distance from the preimages of the critical value to the critical point.
    pub critical_gap: f64,
    pub passed: bool,
}

/// Samples `samples` interior points of `beta` uniformly in its parameter
/// and checks each has two distinct preimages on `z`, while the start of
/// `beta` (the critical value) has the free critical point as its only one.
pub fn two_to_one_check(
    m: &QuadraticRationalMap,
    z: &Curve,
    beta: &Curve,
    samples: usize,
) -> Result<TwoToOneReport, CutError> {
    let n = beta.segment_count() as f64;
    // Edges are chords of the true preimage; allow their sagitta.
    let on_cut_tol = (z.max_edge * z.max_edge).max(REPROJECTION_TOL);
    let mut max_distance_to_cut: f64 = 0.0;
    let mut min_preimage_separation = f64::INFINITY;
    for k in 0..samples {
        let s = n * (k as f64 + 0.5) / samples as f64;
        let [r0, r1] = m.preimages(beta.point_at(s))?;
        min_preimage_separation = min_preimage_separation.min(chordal_distance(r0, r1));
        max_distance_to_cut = max_distance_to_cut.max(z.distance_to(r0)).max(z.distance_to(r1));
    }
    let c2 = m.c2();
    let [q0, q1] = m.preimages(beta.start())?;
    let critical_gap = chordal_distance(q0, c2).max(chordal_distance(q1, c2));
    let passed = max_distance_to_cut <= on_cut_tol
        && min_preimage_separation > 1e-9
        && critical_gap < 1e-6
        && z.distance_to(c2) < POINT_TOL;
    Ok(TwoToOneReport { samples, max_distance_to_cut, min_preimage_separation, critical_gap, passed })
}

/// The initial cut `Z`: the full preimage of `beta`, which must start at the
/// free critical value and avoid the other one. `Z` is a single simple arc
/// through the free critical point.
pub fn initial_cut(m: &QuadraticRationalMap, beta: &Curve) -> Result<Curve, CutError> {
    let (_, values) = critical_data(m)?;
    let v = m.apply(m.c2());
    let other = values
        .into_iter()
        .min_by(|a, b| chordal_distance(*a, v).total_cmp(&chordal_distance(*b, v)).reverse())
        .unwrap();
    if chordal_distance(other, v) > CRITICAL_VALUE_TOL && beta.distance_to(other) < CRITICAL_VALUE_TOL {
        return Err(CutError::OtherCriticalValue(other));
    }
    let pieces = pullback_curve(m, beta)?;
    if pieces.len() != 1 || chordal_distance(beta.start(), v) >= CRITICAL_VALUE_TOL {
        return Err(CutError::NotFromCriticalValue { components: pieces.len() });
    }
    let z = pieces.into_iter().next().unwrap();
    if !z.is_simple() {
        return Err(CutError::SelfIntersects);
    }
    let report = two_to_one_check(m, &z, beta, TWO_TO_ONE_SAMPLES)?;
    if !report.passed {
        return Err(CutError::NotTwoToOne(Box::new(report)));
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::family_member;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> QuadraticRationalMap {
        family_member(1, c(0., 0.)).unwrap().map
    }

    #[test]
    fn square_roots_of_a_segment() {
        let m = square();
        let g = Curve::segment(c(1., 0.), c(4., 0.)).unwrap();
        let out = pullback_curve(&m, &g).unwrap();
        assert_eq!(out.len(), 2);
        let mut ends: Vec<(f64, f64)> = out
            .iter()
            .map(|cv| (cv.start().finite().unwrap().re, cv.end().finite().unwrap().re))
            .collect();
        ends.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!((ends[0].0 + 1.).abs() < 1e-15 && (ends[0].1 + 2.).abs() < 1e-15);
        assert!((ends[1].0 - 1.).abs() < 1e-15 && (ends[1].1 - 2.).abs() < 1e-15);
        for cv in &out {
            assert!(reprojection_error(&m, cv, &g) < 1e-12);
            assert!(cv.max_edge_length() <= g.max_edge);
        }
    }

    #[test]
    fn critical_value_endpoint_merges() {
        let m = square();
        let g = Curve::segment(c(0., 0.), c(1., 0.)).unwrap();
        let out = pullback_curve(&m, &g).unwrap();
        assert_eq!(out.len(), 1);
        let z = &out[0];
        assert!(z.distance_to(SpherePoint::real(0.0)) == 0.0);
        let ends = [z.start().finite().unwrap().re, z.end().finite().unwrap().re];
        assert!((ends[0].abs() - 1.).abs() < 1e-15 && (ends[1].abs() - 1.).abs() < 1e-15);
        assert!(ends[0] * ends[1] < 0.0);
    }

    #[test]
    fn interior_critical_value_is_rejected() {
        let m = square();
        let g = Curve::new(vec![SpherePoint::real(-1.0), SpherePoint::real(0.0), SpherePoint::real(1.0)], 0.1).unwrap();
        assert!(matches!(pullback_curve(&m, &g), Err(CutError::InteriorCriticalValue { .. })));
        let pieces = split_at_critical_values(&m, &g).unwrap();
        assert_eq!(pieces.len(), 2);
    }

    #[test]
    fn split_inserts_critical_value_inside_edge() {
        let m = square();
        let g = Curve::new(vec![SpherePoint::real(-1.0), SpherePoint::real(1.0)], 4.0).unwrap();
        assert_eq!(g.vertices.len(), 2);
        let pieces = split_at_critical_values(&m, &g).unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].end(), SpherePoint::real(0.0));
    }

    #[test]
    fn loop_around_critical_value_lifts_to_one_loop() {
        let m = square();
        let pts: Vec<SpherePoint> = (0..=16)
            .map(|k| SpherePoint::from(Complex64::from_polar(0.5, std::f64::consts::TAU * (k % 16) as f64 / 16.0)))
            .collect();
        let g = Curve::new(pts, 0.05).unwrap();
        assert!(g.is_closed());
        let out = pullback_curve(&m, &g).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].is_closed());
        // Loop not around a critical value: two loops.
        let pts: Vec<SpherePoint> = (0..=16)
            .map(|k| SpherePoint::from(c(2., 0.) + Complex64::from_polar(0.5, std::f64::consts::TAU * (k % 16) as f64 / 16.0)))
            .collect();
        let out = pullback_curve(&m, &Curve::new(pts, 0.05).unwrap()).unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn per2_generic_tiny_arc() {
        let a = c(2., 0.);
        let m = family_member(2, a).unwrap().map;
        let w0 = c(0.7, 0.3);
        let g = Curve::segment(w0, w0 + c(1e-3, 5e-4)).unwrap();
        let out = pullback_curve(&m, &g).unwrap();
        assert_eq!(out.len(), 2);
        // Closed-form preimages -1 ± sqrt(1 + a/w).
        let root = (1.0 + a / w0).sqrt();
        let expect = [c(-1., 0.) + root, c(-1., 0.) - root];
        for cv in &out {
            assert!(reprojection_error(&m, cv, &g) < 1e-9);
            let s = cv.start().finite().unwrap();
            assert!(expect.iter().any(|e| (s - e).norm() < 1e-12));
        }
    }

    #[test]
    fn initial_cut_for_square() {
        let m = square();
        let beta = Curve::segment(c(0., 0.), c(1., 0.)).unwrap();
        let z = initial_cut(&m, &beta).unwrap();
        assert!(z.is_simple());
        let r = two_to_one_check(&m, &z, &beta, 200).unwrap();
        assert!(r.passed, "{r:?}");
        let bad = Curve::segment(c(1., 0.), c(4., 0.)).unwrap();
        assert!(matches!(initial_cut(&m, &bad), Err(CutError::NotFromCriticalValue { components: 2 })));
    }

    #[test]
    fn initial_cut_for_per2() {
        let a = c(2., 0.1);
        let fm = family_member(2, a).unwrap();
        let v = fm.free_critical_value().finite().unwrap();
        assert!((v + a).norm() < 1e-15);
        let beta = Curve::segment(v, v + c(0.05, 0.02)).unwrap();
        let z = initial_cut(&fm.map, &beta).unwrap();
        assert!(z.distance_to(SpherePoint::real(-1.0)) < 1e-12);
        assert!(two_to_one_check(&fm.map, &z, &beta, 200).unwrap().passed);
    }
}
