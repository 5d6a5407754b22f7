mod common;

use std::time::{Duration, Instant};

use common::{gleason_polynomial, polynomial_roots};
use num_complex::Complex64;
use reglue_kit::classify::find_misiurewicz;
use reglue_kit::spider::{angle_to_portrait, spider_solve, OrbitPortrait, SpiderError, SpiderState};

fn solve(p: u64, q: u64) -> (OrbitPortrait, Complex64) {
    let portrait = angle_to_portrait(p, q).unwrap();
    let t = Instant::now();
    let sol = spider_solve(&portrait, 1e-12, 500).unwrap_or_else(|e| panic!("{p}/{q}: {e}"));
    assert!(t.elapsed() < Duration::from_secs(2), "{p}/{q} took {:?}", t.elapsed());
    (portrait, sol.c)
}

/// Periodic angles land at roots of `Q_n`, the Newton oracle.
#[test]
fn periodic_angles_match_gleason_roots() {
    for (p, q) in [(1, 3), (1, 7), (2, 7), (3, 7), (1, 15), (2, 15), (4, 15), (7, 15)] {
        let (portrait, c) = solve(p, q);
        let roots = polynomial_roots(&gleason_polynomial(portrait.period));
        let err = roots.iter().map(|r| (r - c).norm()).fold(f64::INFINITY, f64::min);
        assert!(err < 1e-8, "{p}/{q}: {c} is {err:e} from every root of Q_{}", portrait.period);
    }
}

/// Angles and their conjugates give conjugate parameters.
#[test]
fn conjugate_angles() {
    for (p, q) in [(1, 7), (1, 15), (1, 6)] {
        let (_, a) = solve(p, q);
        let (_, b) = solve(q - p, q);
        assert!((a - b.conj()).norm() < 1e-8, "{p}/{q}: {a} vs {b}");
    }
}

/// `(preperiod, period)` of the critical value of `z^2 + c`, found by
/// direct iteration.
fn critical_portrait(c: Complex64) -> Option<(usize, usize)> {
    let mut orbit = vec![c];
    for _ in 0..40 {
        let z = *orbit.last().unwrap();
        orbit.push(z * z + c);
    }
    for n in 0..12 {
        for period in 1..=12 {
            if (orbit[n] - orbit[n + period]).norm() < 1e-7 && (orbit[n + 1] - orbit[n + 1 + period]).norm() < 1e-7 {
                return Some((n, period));
            }
        }
    }
    None
}

/// Preperiodic angles give critically finite parameters whose critical
/// value has the preperiod and period of the angle.
#[test]
fn preperiodic_angles_are_critically_finite() {
    for (p, q) in [(1, 6), (1, 4), (1, 12), (1, 10)] {
        let (portrait, c) = solve(p, q);
        let got = critical_portrait(c).unwrap_or_else(|| panic!("{p}/{q}: orbit of {c} is not finite"));
        assert_eq!(got.0, portrait.preperiod, "{p}/{q}: c = {c}");
        assert_eq!(portrait.period % got.1, 0, "{p}/{q}: c = {c}, period {}", got.1);
    }
}

#[test]
fn initial_legs_are_disjoint() {
    for (p, q) in [(1, 7), (1, 6), (7, 15)] {
        let s = SpiderState::initial(&angle_to_portrait(p, q).unwrap()).unwrap();
        assert!(s.legs_disjoint(), "{p}/{q}");
    }
}

#[test]
fn misiurewicz_newton_agrees() {
    let (portrait, c) = solve(1, 6);
    let newton = find_misiurewicz(portrait.preperiod, portrait.period, c).unwrap();
    assert!((newton.parameter - c).norm() < 1e-8);
    assert!((c - Complex64::new(0., 1.)).norm() < 1e-8);
}

/// At 5/12 the feet of 1/3 and 2/3 converge to the same fixed point, which
/// the pullback reports instead of choosing a branch.
#[test]
fn merging_feet_are_reported() {
    let portrait = angle_to_portrait(5, 12).unwrap();
    assert!(matches!(spider_solve(&portrait, 1e-12, 500), Err(SpiderError::Pinching { .. })));
}
