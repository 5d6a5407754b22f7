use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::RayError;
use crate::maps::QuadraticRationalMap;
use crate::sphere::{chordal_distance, recip, Finite, Infinity, SpherePoint};

const SUPERATTRACTING_TOL: f64 = 1e-8;
/// Candidate radii (in the normalized coordinate) for the valid disk.
const RADII: [f64; 10] = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05];
const RADIUS_SAMPLES: usize = 32;
/// The product formula is trusted only while each factor stays this close to 1.
const BRANCH_SAFE: f64 = 0.5;
const RESIDUAL_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One step of the map between local coordinates centered at consecutive
/// cycle points: `ζ' = (p1 ζ + p2 ζ²) / (d0 + d1 ζ + d2 ζ²)`. Dropping the
/// constant term keeps tiny coordinates at full relative precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct LocalStep {
    num: [Complex64; 3],
    den: [Complex64; 3],
}

impl LocalStep {
    fn new(m: &QuadraticRationalMap, from: SpherePoint, to: SpherePoint) -> Self {
        let rev = |c: [Complex64; 3]| [c[2], c[1], c[0]];
        let (mut n, mut d, base) = match from {
            Infinity => (rev(m.numerator()), rev(m.denominator()), ZERO),
            Finite(p) => (m.numerator(), m.denominator(), p),
        };
        let target = match to {
            Infinity => {
                std::mem::swap(&mut n, &mut d);
                ZERO
            }
            Finite(q) => q,
        };
        let shift = |c: [Complex64; 3]| {
            [c[0] + c[1] * base + c[2] * base * base, c[1] + 2.0 * c[2] * base, c[2]]
        };
        let (n, den) = (shift(n), shift(d));
        let num = [ZERO, n[1] - target * den[1], n[2] - target * den[2]];
        LocalStep { num, den }
    }

    fn apply(&self, zeta: Complex64) -> Option<Complex64> {
        let n = (self.num[2] * zeta + self.num[1]) * zeta;
        let d = (self.den[2] * zeta + self.den[1]) * zeta + self.den[0];
        let out = n / d;
        (out.is_finite()).then_some(out)
    }

    /// First two Taylor coefficients at 0.
    fn jet(&self) -> (Complex64, Complex64) {
        let [d0, d1, _] = self.den;
        let a = self.num[1] / d0;
        (a, self.num[2] / d0 - a * d1 / d0)
    }
}

/// Local Böttcher coordinate at a super-attracting point of `f^k`.
///
/// With the chart `ζ = z - p` (or `ζ = 1/z` at infinity) the return map is
/// `ζ -> λ ζ² + O(ζ³)`; in `w = λ ζ` it is `w -> w² + O(w³)`, and
/// `φ = lim w_n^(1/2ⁿ)` is evaluated by the product
/// `w_0 · Π (w_{n+1} / w_n²)^(1/2^(n+1))` with principal roots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoettcherData {
    pub map: QuadraticRationalMap,
    pub point: SpherePoint,
    pub period: usize,
    /// Leading coefficient of the return map in the chart at `point`.
    pub lambda: Complex64,
    /// Radius in the normalized coordinate `w` on which `φ` is computed directly.
    pub valid_radius: f64,
    steps: Vec<LocalStep>,
}

impl BoettcherData {
    /// Chart coordinate centered at the point.
    pub fn local(&self, z: SpherePoint) -> Option<Complex64> {
        local_coord(self.point, z)
    }

    /// The sphere point with local coordinate `zeta`.
    pub fn from_local(&self, zeta: Complex64) -> SpherePoint {
        match self.point {
            Infinity => Finite(zeta).reciprocal(),
            Finite(p) => SpherePoint::from(p + zeta),
        }
    }

    /// The return map `f^k` in the local coordinate.
    pub fn return_local(&self, zeta: Complex64) -> Option<Complex64> {
        self.steps.iter().try_fold(zeta, |z, s| s.apply(z))
    }

    /// `φ(z)` by the product formula, or `None` outside the valid disk.
    pub fn phi(&self, z: SpherePoint) -> Option<Complex64> {
        phi_product(self, self.local(z)?, self.valid_radius)
    }

    /// `|φ(f^k(z)) - φ(z)²|`, when both are defined.
    pub fn residual(&self, z: SpherePoint) -> Option<f64> {
        let zeta = self.local(z)?;
        let a = phi_product(self, zeta, self.valid_radius)?;
        let b = phi_product(self, self.return_local(zeta)?, self.valid_radius)?;
        Some((b - a * a).norm())
    }

    /// Inverse of `φ` near the point: the point whose coordinate is `target`,
    /// by Newton's method from the linear approximation.
    pub fn phi_inverse(&self, target: Complex64) -> Option<SpherePoint> {
        if !(target.norm() < self.valid_radius) {
            return None;
        }
        let r = self.valid_radius;
        let phi = |zeta: Complex64| phi_product(self, zeta, r);
        let mut zeta = target / self.lambda;
        for _ in 0..50 {
            let g = phi(zeta)? - target;
            let h = 1e-7 * zeta.norm().max(1e-300);
            let d = (phi(zeta + h)? - phi(zeta - h)?) / (2.0 * h);
            let step = g / d;
            zeta -= step;
            if step.norm() <= 1e-16 * zeta.norm() {
                break;
            }
        }
        let err = (phi(zeta)? - target).norm();
        (err < 1e-12).then(|| self.from_local(zeta))
    }
}

pub(crate) fn local_coord(p: SpherePoint, z: SpherePoint) -> Option<Complex64> {
    match (p, z) {
        (Infinity, Infinity) => Some(ZERO),
        (Infinity, Finite(z)) if z == ZERO => None,
        (Infinity, Finite(z)) => Some(recip(z)),
        (Finite(_), Infinity) => None,
        (Finite(p), Finite(z)) => Some(z - p),
    }
}

fn phi_product(bd: &BoettcherData, zeta: Complex64, radius: f64) -> Option<Complex64> {
    let mut zeta = zeta;
    let mut w = bd.lambda * zeta;
    if !(w.norm() < radius) {
        return None;
    }
    let w0 = w;
    let mut log_sum = ZERO;
    let mut scale = 0.5;
    for _ in 0..64 {
        // Further factors are 1 to working precision; complex division
        // would also underflow soon after.
        if w.norm() < 1e-60 {
            break;
        }
        zeta = bd.return_local(zeta)?;
        let next = bd.lambda * zeta;
        let ratio = next / (w * w);
        if !((ratio - 1.0).norm() < BRANCH_SAFE) {
            return None;
        }
        let term = ratio.ln() * scale;
        log_sum += term;
        if term.norm() < 1e-18 {
            break;
        }
        scale *= 0.5;
        w = next;
    }
    Some(w0 * log_sum.exp())
}

/// Builds the Böttcher data at `point` for `f^period`, after checking that
/// the point is fixed by `f^period` with vanishing derivative and local
/// degree exactly 2.
pub fn boettcher(m: &QuadraticRationalMap, point: SpherePoint, period: usize) -> Result<BoettcherData, RayError> {
    if period == 0 {
        return Err(RayError::InvalidArgument("period must be at least 1".into()));
    }
    let cycle = m.orbit(point, period);
    if chordal_distance(cycle[period], point) > 1e-10 {
        return Err(RayError::NotSuperattracting { point, derivative: f64::NAN });
    }
    let steps: Vec<LocalStep> = (0..period)
        .map(|i| LocalStep::new(m, cycle[i], if i + 1 == period { point } else { cycle[i + 1] }))
        .collect();
    // Compose the 2-jets of the steps.
    let (derivative, lambda) = steps.iter().fold((Complex64::new(1.0, 0.0), ZERO), |(a1, b1), s| {
        let (a2, b2) = s.jet();
        (a2 * a1, a2 * b1 + b2 * a1 * a1)
    });
    if !(derivative.norm() <= SUPERATTRACTING_TOL) {
        return Err(RayError::NotSuperattracting { point, derivative: derivative.norm() });
    }
    if !(lambda.norm() > SUPERATTRACTING_TOL) || !lambda.is_finite() {
        return Err(RayError::LocalDegree { point });
    }
    let mut bd = BoettcherData { map: *m, point, period, lambda, valid_radius: 0.0, steps };
    for r in RADII {
        let ok = (0..RADIUS_SAMPLES).all(|j| {
            let w = Complex64::from_polar(r, std::f64::consts::TAU * (j as f64 + 0.5) / RADIUS_SAMPLES as f64);
            let zeta = w / lambda;
            let Some(a) = phi_product(&bd, zeta, r * (1.0 + 1e-12)) else { return false };
            let Some(b) = bd.return_local(zeta).and_then(|z| phi_product(&bd, z, r)) else { return false };
            (b - a * a).norm() < RESIDUAL_TOL
        });
        if ok {
            bd.valid_radius = r;
            return Ok(bd);
        }
    }
    Err(RayError::LocalDegree { point })
}
