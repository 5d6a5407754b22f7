mod common;

use std::f64::consts::TAU;

use common::{brute_force_preimage_components, c, preimages};
use num_complex::Complex64;
use proptest::prelude::*;
use reglue_kit::cuts::{
    build_cut_complex, build_cut_family, complement_of_curves, critical_data, edge_side_map, from_coord, initial_cut,
    pullback_curve, reprojection_error, Curve, CutFamily, Side,
};
use reglue_kit::{chordal_distance, family_member, QuadraticRationalMap, SpherePoint};

fn member(k: u32, p: Complex64) -> QuadraticRationalMap {
    family_member(k, p).unwrap().map
}

fn segment(a: Complex64, b: Complex64) -> Curve {
    Curve::segment(a, b).unwrap()
}

fn far_from(points: &[SpherePoint], arc: &Curve, tol: f64) -> bool {
    arc.vertices.iter().all(|p| points.iter().all(|v| chordal_distance(*p, *v) > tol))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generic_arcs_lift_to_two_arcs(
        k in 1u32..=2, pr in -2.0f64..2.0, pi in -2.0f64..2.0,
        x in -2.0f64..2.0, y in -2.0f64..2.0, len in 0.02f64..0.3, dir in 0.0f64..TAU,
    ) {
        prop_assume!(k == 1 || Complex64::new(pr, pi).norm() > 0.1);
        let m = member(k, c(pr, pi));
        let (_, values) = critical_data(&m).unwrap();
        let start = c(x, y);
        let arc = segment(start, start + Complex64::from_polar(len, dir));
        prop_assume!(far_from(&values, &arc, 0.05));
        let lifts = pullback_curve(&m, &arc).unwrap();
        prop_assert_eq!(lifts.len(), 2);
        let samples: Vec<Complex64> = (0..=2000).filter_map(|i| arc.point_at(arc.segment_count() as f64 * i as f64 / 2000.0).finite()).collect();
        prop_assert_eq!(brute_force_preimage_components(&m, &samples), 2);
        for l in &lifts {
            prop_assert!(reprojection_error(&m, l, &arc) < 1e-9);
            prop_assert!(l.max_edge_length() <= arc.max_edge + 1e-15);
        }
    }

    #[test]
    fn arcs_from_a_critical_value_lift_to_one_arc(
        k in 1u32..=2, pr in -2.0f64..2.0, pi in -2.0f64..2.0, len in 0.02f64..0.3, dir in 0.0f64..TAU,
    ) {
        prop_assume!(k == 1 || Complex64::new(pr, pi).norm() > 0.1);
        let m = member(k, c(pr, pi));
        let v = m.apply(m.c2()).finite().unwrap();
        let arc = segment(v, v + Complex64::from_polar(len, dir));
        let (_, values) = critical_data(&m).unwrap();
        let other: Vec<SpherePoint> = values.into_iter().filter(|p| chordal_distance(*p, SpherePoint::from(v)) > 1e-9).collect();
        prop_assume!(far_from(&other, &arc, 0.05));
        let lifts = pullback_curve(&m, &arc).unwrap();
        prop_assert_eq!(lifts.len(), 1);
        let z = &lifts[0];
        prop_assert!(z.distance_to(m.c2()) < 1e-12);
        prop_assert!(reprojection_error(&m, z, &arc) < 1e-9);
    }

    #[test]
    fn every_preimage_lies_on_the_lift(
        x in -1.5f64..1.5, y in -1.5f64..1.5, len in 0.05f64..0.4, dir in 0.0f64..TAU, s in 0.0f64..1.0,
    ) {
        let m = member(2, c(2., 0.));
        let (_, values) = critical_data(&m).unwrap();
        let start = c(x, y);
        let arc = segment(start, start + Complex64::from_polar(len, dir));
        prop_assume!(far_from(&values, &arc, 0.05));
        let lifts = pullback_curve(&m, &arc).unwrap();
        let w = arc.point_at(s * arc.segment_count() as f64).finite().unwrap();
        for p in preimages(&m, w) {
            let d = lifts.iter().map(|l| l.distance_to(p)).fold(f64::INFINITY, f64::min);
            // Edges are chords of the true lift.
            prop_assert!(d < arc.max_edge * arc.max_edge, "preimage {} at distance {}", p, d);
        }
    }

    #[test]
    fn rotated_diameters_give_spokes(alpha in 0.0f64..TAU) {
        let m = member(1, c(0., 0.));
        let d = Complex64::from_polar(1.0, alpha);
        let cf = build_cut_family(&m, &segment(-d, d), 2).unwrap();
        prop_assert_eq!(cf.arc_counts(), vec![1, 2, 4]);
        // Level n consists of the 2^n diameters at angles (alpha + 2πj)/2^n.
        for level in 1..=2usize {
            let count = 1usize << level;
            let spokes: Vec<Curve> = (0..count)
                .map(|j| {
                    let e = Complex64::from_polar(1.0, (alpha + std::f64::consts::PI * j as f64) / count as f64);
                    segment(-e, e)
                })
                .collect();
            for arc in cf.levels[level].iter() {
                let best = spokes.iter().map(|s| arc.curve.hausdorff(s)).fold(f64::INFINITY, f64::min);
                prop_assert!(best < 1e-8, "level {} arc off every spoke by {}", level, best);
            }
        }
    }

    #[test]
    fn disjoint_arcs_do_not_separate(x0 in -1.5f64..1.5, y0 in -1.5f64..1.5, gap in 0.3f64..1.0) {
        let a = segment(c(x0, y0), c(x0 + 0.5, y0));
        let b = segment(c(x0, y0 + gap), c(x0 + 0.5, y0 + gap));
        let d = complement_of_curves(&[&a, &b], 128).unwrap();
        prop_assert_eq!(d.component_count, 1);
    }
}

fn circle(center: Complex64, r: f64) -> Curve {
    let pts: Vec<SpherePoint> = (0..=256)
        .map(|i| SpherePoint::from(center + Complex64::from_polar(r, TAU * (i % 256) as f64 / 256.0)))
        .collect();
    Curve::new(pts, 0.02).unwrap()
}

#[test]
fn closed_curve_and_disjoint_arc_give_two_components() {
    let a = circle(c(0.3, -0.2), 0.7);
    let b = segment(c(1.5, 1.5), c(2.0, 1.5));
    assert_eq!(complement_of_curves(&[&a, &b], 128).unwrap().component_count, 2);
}

/// Disjoint cut families used for the side checks.
fn families() -> Vec<CutFamily> {
    let per2 = member(2, c(3., 0.));
    let z = initial_cut(&per2, &segment(c(-3., 0.), c(-2., 0.))).unwrap();
    let poly = member(1, c(0., 1.));
    let z2 = initial_cut(&poly, &segment(c(0., 1.), c(0., 2.))).unwrap();
    vec![build_cut_family(&per2, &z, 2).unwrap(), build_cut_family(&poly, &z2, 2).unwrap()]
}

#[test]
fn side_maps_compose_over_two_levels() {
    for cf in families() {
        let m = &cf.map;
        let cx = build_cut_complex(&cf).unwrap();
        assert!(cx.disjoint, "family is not disjoint: {:?}", cx.stats);
        let root = &cf.levels[0][0].curve;
        let crit = [m.c1(), m.c2()];
        let mut checked = 0;
        for arc in &cf.levels[2] {
            let parent_idx = arc.parent.unwrap();
            let parent = &cf.levels[1][parent_idx].curve;
            for e in 0..arc.curve.segment_count() {
                let (chart, a, b) = arc.curve.edge(e);
                let mid = from_coord((a + b) * 0.5, chart);
                // Orientation flips at critical points of f and f∘f.
                let near_critical = crit.iter().any(|p| chordal_distance(*p, mid) < 1e-2)
                    || crit.iter().any(|p| chordal_distance(*p, m.apply(mid)) < 1e-2);
                if near_critical {
                    continue;
                }
                let Some(direct) = edge_side_map(m, 2, &arc.curve, e, root) else { continue };
                let (e1, _) = parent.nearest_edge(m.apply(mid));
                let step1 = cx.side_image(2, arc.index, e, Side::Plus).unwrap();
                let Some(step2) = cx.side_image(1, parent_idx, e1, step1) else { continue };
                assert_eq!(step2, direct, "level-2 arc {} edge {}", arc.index, e);
                checked += 1;
            }
        }
        assert!(checked > 50, "only {checked} edges checked");
    }
}
