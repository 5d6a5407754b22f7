use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::boettcher::{boettcher, BoettcherData};
use super::trace::{trace_ray, Ray, LANDING_LEVELS};
use super::RayError;
use crate::cuts::{critical_data, pullback_curve, Curve, EndpointTag, DEFAULT_MAX_EDGE};
use crate::maps::{FamilyMember, QuadraticRationalMap};
use crate::sphere::{chordal_distance, SpherePoint};

/// Orbit length after which a critical value counts as outside the basin.
pub const CRITICAL_VALUE_ESCAPE_ITER: usize = 60;
const PROBE_RADII: [f64; 2] = [1e-3, 1e-4];
const PROBE_DIRECTIONS: usize = 16;
const PROBE_MAX_ITER: usize = 5000;
const LIFT_TOL: f64 = 1e-6;
const CENTER_TOL: f64 = 1e-6;
const PATH_SAMPLES: usize = 32;

/// The closure of an internal ray in a Fatou component whose boundary
/// contains the free critical value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryBeta {
    /// From the center of the component to the landing point.
    pub curve: Curve,
    pub center: SpherePoint,
    /// Iterates needed to bring the center onto the marked cycle.
    pub preperiod: usize,
    pub landing: SpherePoint,
    pub distance_to_critical_value: f64,
    /// The traced ray in the periodic component the center lands in.
    pub ray: Ray,
}

impl BoundaryBeta {
    /// The curve from the critical value to the center, with the landing
    /// point replaced by the critical value itself, provided it was within
    /// `tol`.
    pub fn snapped(&self, v: SpherePoint, tol: f64) -> Result<Curve, RayError> {
        if !(self.distance_to_critical_value <= tol) {
            return Err(RayError::LandingMissed { distance: self.distance_to_critical_value });
        }
        let mut vertices: Vec<SpherePoint> = self.curve.vertices.iter().rev().copied().collect();
        vertices[0] = v;
        Ok(Curve::new(vertices, self.curve.max_edge)?.with_tags(Some(EndpointTag::CriticalValue), Some(EndpointTag::Center)))
    }
}

/// Lifts `path` through `m` along the branch that starts at `start`. When
/// `path` ends at a critical value the lift stops at the critical point.
pub fn lift_from(m: &QuadraticRationalMap, path: &Curve, start: SpherePoint) -> Result<Curve, RayError> {
    let (crit, _) = critical_data(m)?;
    let mut best: Option<(f64, Curve)> = None;
    for cv in pullback_curve(m, path)? {
        for oriented in [cv.clone(), cv.reversed()] {
            let d = chordal_distance(oriented.start(), start);
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, oriented));
            }
        }
    }
    let (d, mut cv) = best.expect("pullback returns at least one curve");
    if d > LIFT_TOL {
        return Err(RayError::LiftMismatch(d));
    }
    if let Some(i) = cv.vertices.iter().skip(1).position(|p| crit.contains(p)) {
        cv.vertices.truncate(i + 2);
    }
    cv.vertices[0] = start;
    Ok(cv)
}

/// Points of the marked cycle with their Böttcher data.
fn cycle_data(m: &QuadraticRationalMap, k: usize) -> Result<Vec<BoettcherData>, RayError> {
    m.orbit(m.c1(), k - 1).into_iter().map(|p| boettcher(m, p, k)).collect()
}

fn in_disk(bd: &BoettcherData, z: SpherePoint) -> bool {
    bd.local(z).is_some_and(|zeta| (bd.lambda * zeta).norm() < 0.5 * bd.valid_radius)
}

/// First iterate of `z` inside one of the Böttcher disks.
fn entry(data: &[BoettcherData], m: &QuadraticRationalMap, z: SpherePoint, max_iter: usize) -> Option<(usize, usize)> {
    let mut z = z;
    for n in 0..=max_iter {
        if let Some(i) = data.iter().position(|bd| in_disk(bd, z)) {
            return Some((n, i));
        }
        z = m.apply(z);
    }
    None
}

/// A straight path, in the local coordinate, from `z` to the center of the disk.
fn radial_path(bd: &BoettcherData, z: SpherePoint) -> Result<Curve, RayError> {
    let zeta = bd.local(z).expect("point is in the disk");
    let pts: Vec<SpherePoint> =
        (0..=PATH_SAMPLES).map(|i| bd.from_local(zeta * (1.0 - i as f64 / PATH_SAMPLES as f64))).collect();
    Ok(Curve::new(pts, DEFAULT_MAX_EDGE)?)
}

/// Center of the Fatou component containing `q`: the disk center reached by
/// the orbit of `q`, pulled back along the orbit.
fn component_center(m: &QuadraticRationalMap, data: &[BoettcherData], q: SpherePoint) -> Option<SpherePoint> {
    let (n, i) = entry(data, m, q, PROBE_MAX_ITER)?;
    let orbit = m.orbit(q, n);
    let mut path = radial_path(&data[i], orbit[n]).ok()?;
    for step in (0..n).rev() {
        path = lift_from(m, &path, orbit[step]).ok()?;
    }
    Some(path.end())
}

/// Number of iterates taking `w` onto the marked cycle.
fn preperiod(m: &QuadraticRationalMap, data: &[BoettcherData], w: SpherePoint) -> Option<(usize, usize)> {
    let mut z = w;
    for j in 0..64 {
        if let Some(i) = data.iter().position(|bd| chordal_distance(bd.point, z) < CENTER_TOL) {
            return Some((j, i));
        }
        z = m.apply(z);
    }
    None
}

/// The closure of the internal ray of `angle` in a Fatou component of the
/// basin of the marked cycle whose boundary contains the free critical value.
///
/// The component is found by probing just off the critical value at two
/// radii; among components met at both, the one whose center has the
/// largest preperiod is used. The ray is traced in the periodic component the center
/// eventually lands in and lifted back along the orbit of the center.
pub fn beta_boundary_case(fm: &FamilyMember, angle: f64) -> Result<BoundaryBeta, RayError> {
    let m = &fm.map;
    let v = fm.free_critical_value();
    let data = cycle_data(m, fm.k as usize)?;
    if let Some((n, _)) = entry(&data, m, v, CRITICAL_VALUE_ESCAPE_ITER) {
        return Err(RayError::CriticalValueInBasin { iterations: n });
    }

    // Components seen at every probe radius; tiny components that merely
    // come close to the critical value drop out as the radius shrinks.
    let base = v.finite();
    let mut seen: Vec<Vec<(SpherePoint, usize, usize)>> = Vec::new();
    for r in PROBE_RADII {
        let mut found: Vec<(SpherePoint, usize, usize)> = Vec::new();
        for d in 0..PROBE_DIRECTIONS {
            let dir = Complex64::from_polar(1.0, std::f64::consts::TAU * (d as f64 + 0.5) / PROBE_DIRECTIONS as f64);
            let q = match base {
                Some(b) => SpherePoint::from(b + r * dir),
                None => SpherePoint::from(dir / r),
            };
            let Some(w) = component_center(m, &data, q) else { continue };
            if found.iter().any(|(c, _, _)| chordal_distance(*c, w) < CENTER_TOL) {
                continue;
            }
            if let Some((j, i)) = preperiod(m, &data, w) {
                found.push((w, j, i));
            }
        }
        seen.push(found);
    }
    let (first, rest) = seen.split_first().expect("at least one probe radius");
    let &(center, j, i) = first
        .iter()
        .filter(|(c, _, _)| rest.iter().all(|f| f.iter().any(|(o, _, _)| chordal_distance(*o, *c) < CENTER_TOL)))
        .max_by_key(|(_, j, _)| *j)
        .ok_or(RayError::NoConvergingProbe)?;

    let t1 = 1.0 - 2f64.powi(-*LANDING_LEVELS.end());
    let ray = trace_ray(&data[i], angle, 0.05, t1, 0.05)?;
    let landing = ray.landing.ok_or(RayError::LandingDiverged)?;

    let mut pts = vec![data[i].point];
    pts.extend(ray.trace.vertices.iter().copied());
    let mut path = Curve::new(pts, DEFAULT_MAX_EDGE)?;
    let orbit = m.orbit(center, j);
    for step in (0..j).rev() {
        path = lift_from(m, &path, orbit[step])?;
    }
    let landing = if j == 0 { landing } else { path.end() };
    let curve = path.with_tags(Some(EndpointTag::Center), Some(EndpointTag::Landing));
    let distance_to_critical_value = chordal_distance(landing, v);
    Ok(BoundaryBeta { curve, center, preperiod: j, landing, distance_to_critical_value, ray })
}
