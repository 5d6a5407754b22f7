use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::boettcher::BoettcherData;
use super::RayError;
use crate::cuts::{coord, from_coord, Curve, EndpointTag, DEFAULT_MAX_EDGE};
use crate::maps::{Chart, ChartPoint};
use crate::sphere::{chordal_distance, Infinity, SpherePoint};

/// Potentials `1 - 2^-j` used for the landing extrapolation.
pub const LANDING_LEVELS: std::ops::RangeInclusive<i32> = 4..=12;
pub const LANDING_TOL: f64 = 1e-4;
const MIN_POTENTIAL_STEP: f64 = 1e-10;
const NEWTON_ITER: usize = 40;
const NEWTON_TOL: f64 = 1e-12;

/// An internal (or external) ray traced between two potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub angle: f64,
    pub potentials: [f64; 2],
    /// Trace from the inner to the outer potential, plus the landing point
    /// when it was found.
    pub trace: Curve,
    pub trace_potentials: Vec<f64>,
    pub landing: Option<SpherePoint>,
    /// Largest `|φ(f^{kn}(z)) - target^(2ⁿ)|` accepted by the corrector.
    pub max_residual: f64,
}

/// The chart `1/z` at infinity reverses orientation; angles there are
/// measured so that the ray of angle `θ` leaves infinity in direction
/// `e^{2πiθ}`.
pub(crate) fn orientation(bd: &BoettcherData) -> f64 {
    if bd.point == Infinity {
        -1.0
    } else {
        1.0
    }
}

/// Coordinate value on the ray of `angle` at potential `t`.
pub fn ray_target(bd: &BoettcherData, angle: f64, t: f64) -> Complex64 {
    Complex64::from_polar(t, orientation(bd) * std::f64::consts::TAU * angle.rem_euclid(1.0))
}

/// Number of return-map iterations bringing potential `t` inside the disk
/// where `φ` is evaluated directly.
fn depth_for(bd: &BoettcherData, t: f64) -> u32 {
    let limit = 0.5 * bd.valid_radius;
    let mut n = 0;
    let mut s = t;
    while s >= limit && n < 60 {
        s *= s;
        n += 1;
    }
    n
}

/// Value of `φ(f^{kn}(z))`, if defined.
fn pulled_phi(bd: &BoettcherData, z: SpherePoint, n: u32) -> Option<Complex64> {
    let mut z = z;
    for _ in 0..n as usize * bd.period {
        z = bd.map.apply(z);
    }
    bd.phi(z)
}

fn pow2n(z: Complex64, n: u32) -> Complex64 {
    let mut z = z;
    for _ in 0..n {
        z = z * z;
    }
    z
}

/// Newton's method in a chart for `φ(f^{kn}(z)) = target^(2ⁿ)`.
fn correct(bd: &BoettcherData, guess: SpherePoint, chart: Chart, target: Complex64, n: u32) -> Option<(SpherePoint, f64)> {
    let goal = pow2n(target, n);
    let mut u = coord(guess, chart)?;
    let g = |u: Complex64| pulled_phi(bd, from_coord(u, chart), n).map(|v| v - goal);
    let mut val = g(u)?;
    for _ in 0..NEWTON_ITER {
        if val.norm() < NEWTON_TOL {
            break;
        }
        let h = 1e-8 * u.norm().max(1e-3);
        let d = (g(u + h)? - g(u - h)?) / (2.0 * h);
        if !(d.norm() > 0.0) {
            return None;
        }
        let mut step = val / d;
        // Damped step: never increase the residual.
        let mut accepted = false;
        for _ in 0..20 {
            if let Some(v) = g(u - step) {
                if v.norm() < val.norm() {
                    u -= step;
                    val = v;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (val.norm() < NEWTON_TOL * 10.0).then(|| (from_coord(u, chart), val.norm()))
}

fn natural_chart(p: SpherePoint) -> Chart {
    ChartPoint::natural(p).chart
}

/// Traces the ray of `angle` from potential `t0` to `t1` (`0 < t0 < t1 < 1`)
/// by predictor-corrector continuation with initial potential step `step`.
/// Beyond the directly valid disk the defining equation is pulled back by
/// iterates of the return map. If `t1` reaches `1 - 2^-12`, the landing
/// point is extrapolated from the trace.
pub fn trace_ray(bd: &BoettcherData, angle: f64, t0: f64, t1: f64, step: f64) -> Result<Ray, RayError> {
    if !(0.0 < t0 && t0 < t1 && t1 < 1.0) || !(step > 0.0) || !angle.is_finite() {
        return Err(RayError::InvalidArgument(format!("need 0 < t0 < t1 < 1 and step > 0 (t0={t0}, t1={t1}, step={step})")));
    }
    let start_t = t0.min(0.25 * bd.valid_radius);
    let start = bd
        .phi_inverse(ray_target(bd, angle, start_t))
        .ok_or(RayError::CorrectorDiverged { last_potential: start_t })?;

    // Mandatory stops: t0, t1 and the landing potentials.
    let mut stops: Vec<f64> = LANDING_LEVELS.map(|j| 1.0 - 2f64.powi(-j)).filter(|&t| t > start_t && t < t1).collect();
    stops.push(t1);
    if t0 > start_t {
        stops.push(t0);
    }
    stops.sort_by(f64::total_cmp);

    let mut points = vec![start];
    let mut pots = vec![start_t];
    let mut max_residual: f64 = 0.0;
    let mut t = start_t;
    let mut dt = step;
    let mut stop_idx = 0;
    while stop_idx < stops.len() {
        let goal = stops[stop_idx];
        let next_t = (t + dt).min(goal);
        let last = *points.last().unwrap();
        let chart = natural_chart(last);
        let guess = match (points.len() >= 2, coord(last, chart)) {
            (true, Some(ul)) => match coord(points[points.len() - 2], chart) {
                Some(up) => {
                    let prev_dt = t - pots[pots.len() - 2];
                    from_coord(ul + (ul - up) * ((next_t - t) / prev_dt), chart)
                }
                None => last,
            },
            _ => last,
        };
        let n = depth_for(bd, next_t);
        let target = ray_target(bd, angle, next_t);
        let corrected = correct(bd, guess, natural_chart(guess), target, n)
            .filter(|(z, _)| chordal_distance(*z, last) <= DEFAULT_MAX_EDGE);
        match corrected {
            Some((z, res)) => {
                max_residual = max_residual.max(res);
                points.push(z);
                pots.push(next_t);
                t = next_t;
                if t >= goal {
                    stop_idx += 1;
                }
                dt = (dt * 1.5).min(step);
            }
            None => {
                dt *= 0.5;
                if dt < MIN_POTENTIAL_STEP {
                    return Err(RayError::CorrectorDiverged { last_potential: t });
                }
            }
        }
    }

    // Drop the lead-in below t0.
    let first = pots.iter().position(|&p| p >= t0).unwrap_or(0);
    let mut points = points.split_off(first);
    let mut pots = pots.split_off(first);
    dedup_consecutive(&mut points, &mut pots);

    let landing = landing_point(&points, &pots, angle);
    let mut vertices = points;
    if let Some(l) = landing {
        vertices.push(l);
    }
    let trace = Curve::new(vertices, DEFAULT_MAX_EDGE)?.with_tags(None, landing.map(|_| EndpointTag::Landing));
    Ok(Ray { angle, potentials: [t0, t1], trace, trace_potentials: pots, landing, max_residual })
}

fn dedup_consecutive(points: &mut Vec<SpherePoint>, pots: &mut Vec<f64>) {
    let mut i = 1;
    while i < points.len() {
        if chordal_distance(points[i], points[i - 1]) < 1e-15 {
            points.remove(i);
            pots.remove(i);
        } else {
            i += 1;
        }
    }
}

/// Eventual period of `angle` under doubling, if it is found among the
/// first few iterates.
pub fn doubling_period(angle: f64) -> Option<usize> {
    let orbit: Vec<f64> = std::iter::successors(Some(angle.rem_euclid(1.0)), |a| Some((2.0 * a).rem_euclid(1.0))).take(24).collect();
    let close = |a: f64, b: f64| {
        let d = (a - b).abs();
        d.min(1.0 - d) < 1e-9
    };
    (0..12).find_map(|i| (1..=12).find(|&p| close(orbit[i], orbit[i + p])))
}

/// Aitken extrapolation over the potentials `1 - 2^-j`, with stride equal
/// to the eventual doubling period of the angle; the landing point is the
/// last extrapolant when the last three agree within [`LANDING_TOL`].
pub fn landing_point(points: &[SpherePoint], pots: &[f64], angle: f64) -> Option<SpherePoint> {
    let samples: Vec<SpherePoint> = LANDING_LEVELS
        .map(|j| {
            let t = 1.0 - 2f64.powi(-j);
            pots.iter().position(|&p| (p - t).abs() < 1e-14).map(|i| points[i])
        })
        .collect::<Option<Vec<_>>>()?;
    let stride = doubling_period(angle).unwrap_or(1).min(3);
    let chart = natural_chart(*samples.last().unwrap());
    let u: Vec<Complex64> = samples.iter().map(|&p| coord(p, chart)).collect::<Option<Vec<_>>>()?;
    let mut extrapolants = Vec::new();
    for i in 2 * stride..u.len() {
        let (a, b, c) = (u[i - 2 * stride], u[i - stride], u[i]);
        let denom = c - 2.0 * b + a;
        let e = if denom.norm() > 1e-300 { c - (c - b) * (c - b) / denom } else { c };
        extrapolants.push(from_coord(e, chart));
    }
    if extrapolants.len() < 3 {
        return None;
    }
    let tail = &extrapolants[extrapolants.len() - 3..];
    let spread = tail
        .iter()
        .flat_map(|a| tail.iter().map(move |b| chordal_distance(*a, *b)))
        .fold(0.0, f64::max);
    (spread < LANDING_TOL).then_some(tail[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::family_member;
    use crate::rays::boettcher;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn square_external_rays_are_straight() {
        let m = family_member(1, c(0., 0.)).unwrap().map;
        let bd = boettcher(&m, Infinity, 1).unwrap();
        let ray = trace_ray(&bd, 0.125, 0.1, 1.0 - 2f64.powi(-12), 0.05).unwrap();
        let dir = Complex64::from_polar(1.0, std::f64::consts::TAU * 0.125);
        for p in &ray.trace.vertices {
            let z = p.finite().unwrap();
            assert!((z / dir).im.abs() < 1e-9 * z.norm(), "{z}");
        }
        let l = ray.landing.unwrap();
        assert!(chordal_distance(l, SpherePoint::from(dir)) < 1e-6);
    }

    #[test]
    fn doubling_periods() {
        assert_eq!(doubling_period(0.0), Some(1));
        assert_eq!(doubling_period(1.0 / 3.0), Some(2));
        assert_eq!(doubling_period(1.0 / 7.0), Some(3));
        assert_eq!(doubling_period(1.0 / 6.0), Some(2));
    }

    #[test]
    fn invalid_potentials() {
        let m = family_member(1, c(0., 0.)).unwrap().map;
        let bd = boettcher(&m, Infinity, 1).unwrap();
        assert!(trace_ray(&bd, 0.0, 0.5, 0.4, 0.1).is_err());
        assert!(trace_ray(&bd, 0.0, 0.1, 1.0, 0.1).is_err());
    }
}
