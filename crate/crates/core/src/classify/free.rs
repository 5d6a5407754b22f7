use serde::{Deserialize, Serialize};

use super::basin::{PixelClassifier, PIXEL_MAX_ITER};
use super::cycle::{detect_cycle, Cycle, MAX_PERIOD};
use crate::maps::{ChartPoint, FamilyMember, QuadraticRationalMap};
use crate::raster::SphereGrid;
use crate::sphere::{chordal_distance, SpherePoint};

/// Chordal tolerance for "lands exactly" on a cycle point.
pub const LANDING_TOL: f64 = 1e-12;
/// Entering this chordal neighborhood of the marked cycle starts the
/// capture test.
pub const CAPTURE_ENTRY_EPS: f64 = 1e-3;
/// The orbit must then stay this close for `2k` further iterations.
pub const CAPTURE_CONFIRM_EPS: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassificationTag {
    /// The free critical point is periodic or lands exactly on the marked cycle.
    PeriodicCritical,
    /// It converges to the marked cycle from inside an immediate-basin component.
    Immediate,
    /// It converges to the marked cycle from a strictly preperiodic component.
    Capture,
    /// It converges to a different attracting cycle.
    OtherAttractor,
    Unresolved,
}

impl ClassificationTag {
    pub const ALL: [ClassificationTag; 5] = [
        ClassificationTag::PeriodicCritical,
        ClassificationTag::Immediate,
        ClassificationTag::Capture,
        ClassificationTag::OtherAttractor,
        ClassificationTag::Unresolved,
    ];
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// Number of orbit steps examined.
    pub orbit_length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landing_time: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub own_period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_time: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attractor_period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basin_resolution: Option<usize>,
    /// A critically finite parameter found inside the scan cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tag: ClassificationTag,
    pub evidence: Evidence,
}

impl Classification {
    fn new(tag: ClassificationTag, evidence: Evidence) -> Self {
        Self { tag, evidence }
    }
}

fn marked_cycle(map: &QuadraticRationalMap) -> Option<Cycle> {
    detect_cycle(map, map.c1(), 4 * MAX_PERIOD, LANDING_TOL).ok().flatten()
}

/// Classifies the orbit of the free critical point `c2` of a family member.
pub fn classify_free_critical(fm: &FamilyMember, resolution: usize, max_iter: usize) -> Classification {
    let map = &fm.map;
    let mut ev = Evidence::default();
    let Some(marked) = marked_cycle(map) else {
        return Classification::new(ClassificationTag::Unresolved, ev);
    };
    let c2 = map.c2();
    let confirm = 2 * fm.k as usize;
    let mut cp = ChartPoint::natural(c2);
    let mut recent: Vec<SpherePoint> = vec![c2];
    let mut n = 0;
    while n < max_iter {
        n += 1;
        cp = map.step_chart(cp).0;
        let z = cp.to_sphere();
        ev.orbit_length = n;
        let (_, d) = marked.nearest(z);
        if d < LANDING_TOL {
            ev.landing_time = Some(n);
            return Classification::new(ClassificationTag::PeriodicCritical, ev);
        }
        if chordal_distance(z, c2) < LANDING_TOL {
            ev.own_period = Some(n);
            return Classification::new(ClassificationTag::PeriodicCritical, ev);
        }
        if d < CAPTURE_ENTRY_EPS {
            let mut stays = true;
            let mut probe = cp;
            for _ in 0..confirm {
                probe = map.step_chart(probe).0;
                if marked.nearest(probe.to_sphere()).1 >= CAPTURE_CONFIRM_EPS {
                    stays = false;
                    break;
                }
            }
            if stays {
                ev.entry_time = Some(n);
                ev.basin_resolution = Some(resolution);
                let grid = SphereGrid::new(resolution);
                let classifier = PixelClassifier::new(map, &marked, PIXEL_MAX_ITER);
                // Certified links never cross the Julia set, so reaching the
                // cycle proves IMMEDIATE; plain same-key links over-connect, so
                // failing to reach even with them, inside a pocket walled only
                // by converged pixels of other keys, supports CAPTURE.
                let tag = match classifier.component_reaches_cycle(&grid, c2) {
                    Some(true) => ClassificationTag::Immediate,
                    _ => match classifier.explore_component_with(&grid, c2, 0.0) {
                        Some(s) if !s.reached && !s.touches_unconverged => ClassificationTag::Capture,
                        _ => ClassificationTag::Unresolved,
                    },
                };
                return Classification::new(tag, ev);
            }
        }
        // Near-return away from the marked cycle: another attractor.
        if recent.iter().any(|q| chordal_distance(z, *q) < 1e-10) {
            if let Ok(Some(cy)) = detect_cycle(map, z, 4 * MAX_PERIOD, 1e-10) {
                if cy.is_attracting() && !cy.same_as(&marked, 1e-6) {
                    ev.attractor_period = Some(cy.period);
                    return Classification::new(ClassificationTag::OtherAttractor, ev);
                }
            }
        }
        if recent.len() >= MAX_PERIOD {
            recent.remove(0);
        }
        recent.push(z);
    }
    Classification::new(ClassificationTag::Unresolved, ev)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignatureEntry {
    pub period: usize,
    pub critical_on_cycle: usize,
    /// Steps for the other critical orbit to land on this cycle, if it does.
    pub landing_time: Option<usize>,
}

/// The super-attracting orbit structure of a map, as a sorted multiset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature(pub Vec<SignatureEntry>);

const SIGNATURE_TOL: f64 = 1e-10;

pub fn superattracting_signature(map: &QuadraticRationalMap) -> Signature {
    let (c1, c2) = map.marked();
    let crit = [c1, c2];
    // (cycle points, indices of critical points on it)
    let mut cycles: Vec<(Vec<SpherePoint>, Vec<usize>)> = Vec::new();
    for (ci, &c) in crit.iter().enumerate() {
        if cycles.iter().any(|(_, on)| on.contains(&ci)) {
            continue;
        }
        let orbit = map.orbit(c, MAX_PERIOD);
        let Some(period) = (1..=MAX_PERIOD).find(|&n| chordal_distance(orbit[n], c) < SIGNATURE_TOL) else {
            continue;
        };
        let points = orbit[..period].to_vec();
        let on: Vec<usize> = (0..2)
            .filter(|&j| points.iter().any(|p| chordal_distance(*p, crit[j]) < SIGNATURE_TOL))
            .collect();
        cycles.push((points, on));
    }
    let mut entries: Vec<SignatureEntry> = cycles
        .iter()
        .map(|(points, on)| {
            let landing_time = (0..2).filter(|j| !on.contains(j)).find_map(|j| {
                let orbit = map.orbit(crit[j], MAX_PERIOD);
                (1..=MAX_PERIOD).find(|&n| points.iter().any(|p| chordal_distance(orbit[n], *p) < SIGNATURE_TOL))
            });
            SignatureEntry { period: points.len(), critical_on_cycle: on.len(), landing_time }
        })
        .collect();
    entries.sort();
    Signature(entries)
}

impl Signature {
    /// The necessary condition for one map to represent another.
    pub fn compatible_with(&self, other: &Signature) -> bool {
        self == other
    }
}
