//! The spider algorithm: Thurston pullback for critically finite quadratic
//! polynomials `z² + c`, driven by an external angle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cuts::{Curve, CutError, DEFAULT_MAX_EDGE};
use crate::geometry::segment_intersections;
use crate::sphere::{chordal_distance, Infinity, SpherePoint};

/// Feet closer than this after a step mean the spider has pinched.
pub const PINCH_TOL: f64 = 1e-12;
/// Largest turn of `w - c` between consecutive leg vertices during a lift.
const MAX_TURN: f64 = 0.3;
const LEG_SPACING: f64 = 1e-9;
/// Leg pieces beyond this modulus are ignored by the disjointness test.
const DISJOINT_RADIUS: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpiderError {
    #[error("invalid angle {p}/{q}: need 0 <= p < q with gcd(p, q) = 1")]
    InvalidAngle { p: u64, q: u64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("pinching: feet {i} and {j} coincide")]
    Pinching { i: usize, j: usize },
    #[error("no convergence after {} steps (last delta {:e})", deltas.len(), deltas.last().copied().unwrap_or(f64::NAN))]
    MaxIterations { deltas: Vec<f64> },
    #[error(transparent)]
    Cut(#[from] CutError),
}

/// The doubling orbit of a rational angle `p/q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitPortrait {
    pub p: u64,
    pub q: u64,
    /// Numerators of `2^j p/q mod 1` over `q`, without repetition.
    pub orbit: Vec<u64>,
    pub preperiod: usize,
    pub period: usize,
}

impl OrbitPortrait {
    /// Number of marked points.
    pub fn len(&self) -> usize {
        self.orbit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbit.is_empty()
    }

    pub fn angle(&self, j: usize) -> f64 {
        self.orbit[j] as f64 / self.q as f64
    }

    /// Index of the marked point the `j`-th one maps to.
    pub fn successor(&self, j: usize) -> usize {
        if j + 1 < self.len() {
            j + 1
        } else {
            self.preperiod
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn angle_to_portrait(p: u64, q: u64) -> Result<OrbitPortrait, SpiderError> {
    if q == 0 || p >= q || gcd(p, q) != 1 {
        return Err(SpiderError::InvalidAngle { p, q });
    }
    let mut orbit = vec![p];
    loop {
        let next = ((2 * orbit.last().unwrap()) as u128 % q as u128) as u64;
        if let Some(pre) = orbit.iter().position(|&x| x == next) {
            let period = orbit.len() - pre;
            return Ok(OrbitPortrait { p, q, orbit, preperiod: pre, period });
        }
        orbit.push(next);
    }
}

/// Feet `x_1 = c, x_2, …, x_n` with one leg from each foot to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiderState {
    pub portrait: OrbitPortrait,
    pub c: Complex64,
    pub feet: Vec<Complex64>,
    pub legs: Vec<Curve>,
    pub iteration: usize,
}

fn radial_leg(foot: Complex64, angle: f64) -> Result<Curve, CutError> {
    let dir = Complex64::from_polar(1.0, std::f64::consts::TAU * angle);
    let far = foot + 4.0 * dir;
    Curve::new(vec![SpherePoint::from(foot), SpherePoint::from(far), Infinity], DEFAULT_MAX_EDGE)
}

impl SpiderState {
    /// Feet on the unit circle at the portrait angles, with radial legs.
    pub fn initial(portrait: &OrbitPortrait) -> Result<Self, SpiderError> {
        let feet: Vec<Complex64> =
            (0..portrait.len()).map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * portrait.angle(j))).collect();
        Self::with_feet(portrait, feet)
    }

    /// Feet at the given points, with straight legs in the portrait directions.
    pub fn with_feet(portrait: &OrbitPortrait, feet: Vec<Complex64>) -> Result<Self, SpiderError> {
        let legs = feet
            .iter()
            .enumerate()
            .map(|(j, &f)| radial_leg(f, portrait.angle(j)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SpiderState { portrait: portrait.clone(), c: feet[0], feet, legs, iteration: 0 })
    }

    /// Feet on the critical orbit of `c`.
    pub fn at_parameter(portrait: &OrbitPortrait, c: Complex64) -> Result<Self, SpiderError> {
        let mut feet = vec![c];
        while feet.len() < portrait.len() {
            let z = *feet.last().unwrap();
            feet.push(z * z + c);
        }
        Self::with_feet(portrait, feet)
    }

    /// No two legs meet away from infinity.
    pub fn legs_disjoint(&self) -> bool {
        let segs: Vec<Vec<(Complex64, Complex64)>> = self
            .legs
            .iter()
            .map(|leg| {
                leg.vertices
                    .windows(2)
                    .filter_map(|w| match (w[0].finite(), w[1].finite()) {
                        (Some(a), Some(b)) if a.norm() <= DISJOINT_RADIUS && b.norm() <= DISJOINT_RADIUS => Some((a, b)),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        (0..segs.len()).all(|i| (i + 1..segs.len()).all(|j| segment_intersections(&segs[i], &segs[j], |_, _| false).is_empty()))
    }
}

/// Preimage of a leg under `z ↦ z² + c`, starting far out on the branch
/// asymptotic to `angle` and continuing the square root inward.
fn lift_leg(leg: &Curve, c: Complex64, angle: f64) -> Result<(Complex64, Curve), CutError> {
    let finite: Vec<Complex64> = leg.vertices.iter().filter_map(SpherePoint::finite).collect();
    let mut pts = vec![finite[0]];
    for &b in &finite[1..] {
        subdivide(*pts.last().unwrap(), b, c, &mut pts, 0);
    }
    let dir = Complex64::from_polar(1.0, std::f64::consts::TAU * angle);
    let far = (pts.last().unwrap() - c).sqrt();
    let mut prev = if (far * dir.conj()).re >= 0.0 { far } else { -far };
    let mut lifted = vec![prev];
    for &w in pts.iter().rev().skip(1) {
        let r = (w - c).sqrt();
        prev = if (r - prev).norm() <= (r + prev).norm() { r } else { -r };
        lifted.push(prev);
    }
    lifted.reverse();
    let foot = lifted[0];
    let mut vertices: Vec<SpherePoint> = lifted.into_iter().map(SpherePoint::from).collect();
    // Lifting contracts the legs near their feet; thin out crowded vertices.
    vertices.dedup_by(|a, b| chordal_distance(*a, *b) < LEG_SPACING);
    vertices.push(Infinity);
    Ok((foot, Curve::new(vertices, DEFAULT_MAX_EDGE)?))
}

fn subdivide(a: Complex64, b: Complex64, c: Complex64, out: &mut Vec<Complex64>, depth: u32) {
    let (da, db) = (a - c, b - c);
    let turn = if da.norm() == 0.0 || db.norm() == 0.0 { 0.0 } else { (db / da).arg().abs() };
    if turn > MAX_TURN && depth < 40 {
        let m = 0.5 * (a + b);
        subdivide(a, m, c, out, depth + 1);
        subdivide(m, b, c, out, depth + 1);
    } else {
        out.push(b);
    }
}

/// One pullback step: `x'_j = ±√(x_{s(j)} - c)`, with the branch and the new
/// leg given by lifting the leg of `x_{s(j)}` from infinity along angle `θ_j`.
pub fn spider_step(s: &SpiderState) -> Result<SpiderState, SpiderError> {
    let n = s.portrait.len();
    let mut feet = Vec::with_capacity(n);
    let mut legs = Vec::with_capacity(n);
    for j in 0..n {
        let (foot, leg) = lift_leg(&s.legs[s.portrait.successor(j)], s.c, s.portrait.angle(j))?;
        feet.push(foot);
        legs.push(leg);
    }
    for i in 0..n {
        for j in i + 1..n {
            if (feet[i] - feet[j]).norm() < PINCH_TOL {
                return Err(SpiderError::Pinching { i, j });
            }
        }
    }
    Ok(SpiderState { portrait: s.portrait.clone(), c: feet[0], feet, legs, iteration: s.iteration + 1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiderSolution {
    pub c: Complex64,
    /// Parameter after each step.
    pub history: Vec<Complex64>,
    /// `|c_{n+1} - c_n|` for each step.
    pub deltas: Vec<f64>,
}

impl SpiderSolution {
    /// Convergence report with columns `step,c_real,c_imag,delta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,c_real,c_imag,delta\n");
        for (i, (c, d)) in self.history.iter().zip(&self.deltas).enumerate() {
            out.push_str(&format!("{},{:.17e},{:.17e},{:.6e}\n", i + 1, c.re, c.im, d));
        }
        out
    }
}

/// Iterates [`spider_step`] from the standard initial spider until the
/// parameter moves by less than `tol`.
pub fn spider_solve(portrait: &OrbitPortrait, tol: f64, max_iter: usize) -> Result<SpiderSolution, SpiderError> {
    if !(tol > 0.0) {
        return Err(SpiderError::InvalidTolerance(tol));
    }
    let mut state = SpiderState::initial(portrait)?;
    let mut history = Vec::new();
    let mut deltas = Vec::new();
    for _ in 0..max_iter {
        let next = spider_step(&state)?;
        let delta = (next.c - state.c).norm();
        history.push(next.c);
        deltas.push(delta);
        state = next;
        if delta < tol {
            return Ok(SpiderSolution { c: state.c, history, deltas });
        }
    }
    Err(SpiderError::MaxIterations { deltas })
}
