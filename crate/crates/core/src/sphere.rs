//! Points of the Riemann sphere, the chordal metric, Möbius transformations
//! and the quadratic solver every preimage computation reduces to.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Beyond this modulus computations switch to the `1/z` chart.
pub const CHART_SWITCH: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SphereError {
    #[error("degenerate equation")]
    DegenerateEquation,
    #[error("degenerate Möbius transformation (determinant {0:e})")]
    DegenerateMobius(f64),
    #[error("indeterminate: map not in lowest terms")]
    Indeterminate,
    #[error("degenerate map: degree is less than 2")]
    DegenerateMap,
    #[error("period not implemented: {0}")]
    PeriodNotImplemented(u32),
    #[error("degenerate parameter")]
    DegenerateParameter,
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

pub use SpherePoint::{Finite, Infinity};

impl PartialEq for SpherePoint {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Finite(a), Finite(b)) => a == b,
            (Infinity, Infinity) => true,
            _ => false,
        }
    }
}

impl SpherePoint {
    pub fn new(re: f64, im: f64) -> Self {
        Self::from(Complex64::new(re, im))
    }

    pub fn real(x: f64) -> Self {
        Self::new(x, 0.0)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            Finite(z) => Some(*z),
            Infinity => None,
        }
    }

    /// The antipodal-chart coordinate `1/z` (0 for infinity, infinity for 0).
    pub fn reciprocal(&self) -> SpherePoint {
        match self {
            Infinity => Finite(Complex64::new(0.0, 0.0)),
            Finite(z) if *z == Complex64::new(0.0, 0.0) => Infinity,
            Finite(z) => Finite(recip(*z)),
        }
    }

    /// Lexicographic (re, im) order with infinity last.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Infinity, Infinity) => Ordering::Equal,
            (Infinity, _) => Ordering::Greater,
            (_, Infinity) => Ordering::Less,
            (Finite(a), Finite(b)) => a
                .re
                .total_cmp(&b.re)
                .then_with(|| a.im.total_cmp(&b.im)),
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            Finite(z)
        } else {
            Infinity
        }
    }
}

impl From<f64> for SpherePoint {
    fn from(x: f64) -> Self {
        SpherePoint::real(x)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infinity => write!(f, "inf"),
            Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

// Serialized as `[re, im]` or the string `"inf"`.
impl Serialize for SpherePoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Infinity => s.serialize_str("inf"),
            Finite(z) => [z.re, z.im].serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Pair([f64; 2]),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Pair([re, im]) if re.is_finite() && im.is_finite() => Ok(SpherePoint::new(re, im)),
            Raw::Pair(_) => Err(serde::de::Error::custom("non-finite coordinate")),
            Raw::Tag(t) if t == "inf" => Ok(Infinity),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("unknown point tag {t:?}"))),
        }
    }
}

/// `1/z` without overflow or underflow in the intermediate `|z|^2`.
pub fn recip(z: Complex64) -> Complex64 {
    let s = z.re.abs().max(z.im.abs());
    if s == 0.0 || !s.is_finite() {
        return z.inv();
    }
    let w = z / s;
    w.conj() / (w.norm_sqr() * s)
}

/// Chordal distance `2|p - q| / sqrt((1+|p|^2)(1+|q|^2))`, in `[0, 2]`.
pub fn chordal_distance(p: SpherePoint, q: SpherePoint) -> f64 {
    match (p, q) {
        (Infinity, Infinity) => 0.0,
        (Finite(z), Infinity) | (Infinity, Finite(z)) => 2.0 / 1f64.hypot(z.norm()),
        (Finite(a), Finite(b)) => {
            // Large moduli go through the reciprocal chart to avoid overflow.
            if a.norm() > CHART_SWITCH && b.norm() > CHART_SWITCH {
                let (ia, ib) = (recip(a), recip(b));
                2.0 * (ia - ib).norm() / ((1.0 + ia.norm_sqr()) * (1.0 + ib.norm_sqr())).sqrt()
            } else {
                let d = 2.0 * (a - b).norm();
                let na = (1.0 + a.norm_sqr()).sqrt();
                let nb = (1.0 + b.norm_sqr()).sqrt();
                (d / na / nb).min(2.0)
            }
        }
    }
}

/// Roots of `a z^2 + b z + c` on the sphere, with multiplicity, sorted
/// lexicographically (infinity last).
pub fn solve_quadratic(
    a: Complex64,
    b: Complex64,
    c: Complex64,
) -> Result<[SpherePoint; 2], SphereError> {
    let zero = Complex64::new(0.0, 0.0);
    if a == zero && b == zero && c == zero {
        return Err(SphereError::DegenerateEquation);
    }
    let mut roots = if a == zero {
        if b == zero {
            // c y^2 = 0 in homogeneous coordinates: double root at infinity.
            [Infinity, Infinity]
        } else {
            [SpherePoint::from(-c / b), Infinity]
        }
    } else {
        let s = (b * b - 4.0 * a * c).sqrt();
        // Pick the sign that avoids cancellation in b + s.
        let q = if (b + s).norm() >= (b - s).norm() {
            -(b + s) / 2.0
        } else {
            -(b - s) / 2.0
        };
        if q == zero {
            [Finite(zero), Finite(zero)]
        } else {
            [SpherePoint::from(q / a), SpherePoint::from(c / q)]
        }
    };
    roots.sort_by(|p, q| p.lex_cmp(q));
    Ok(roots)
}

/// A Möbius transformation `z -> (a z + b) / (c z + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self, SphereError> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !(det.norm() > 1e-14 * scale * scale) {
            return Err(SphereError::DegenerateMobius(det.norm()));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self { a: one, b: zero, c: zero, d: one }
    }

    /// `z -> 1/z`.
    pub fn inversion() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self { a: zero, b: one, c: one, d: zero }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// Scales the coefficients so that the determinant is 1.
    pub fn normalized(&self) -> Self {
        let s = self.determinant().sqrt().inv();
        Self { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        let zero = Complex64::new(0.0, 0.0);
        match p {
            Infinity => {
                if self.c == zero {
                    Infinity
                } else {
                    SpherePoint::from(self.a / self.c)
                }
            }
            Finite(z) => {
                let (num, den) = if z.norm() > CHART_SWITCH {
                    let u = recip(z);
                    (self.a + self.b * u, self.c + self.d * u)
                } else {
                    (self.a * z + self.b, self.c * z + self.d)
                };
                if den == zero {
                    Infinity
                } else {
                    SpherePoint::from(num / den)
                }
            }
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Coefficient distance after normalizing both to determinant 1, modulo
    /// the overall sign ambiguity.
    pub fn coefficient_distance(&self, other: &Mobius) -> f64 {
        let p = self.normalized();
        let q = other.normalized();
        let plus = (p.a - q.a).norm() + (p.b - q.b).norm() + (p.c - q.c).norm() + (p.d - q.d).norm();
        let minus = (p.a + q.a).norm() + (p.b + q.b).norm() + (p.c + q.c).norm() + (p.d + q.d).norm();
        plus.min(minus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn chordal_examples() {
        assert_eq!(chordal_distance(0.0.into(), 0.0.into()), 0.0);
        assert_eq!(chordal_distance(0.0.into(), Infinity), 2.0);
        assert!((chordal_distance(1.0.into(), (-1.0).into()) - 2.0).abs() < 1e-15);
        assert_eq!(chordal_distance(Infinity, Infinity), 0.0);
    }

    #[test]
    fn chordal_large_moduli_stay_accurate() {
        let p = SpherePoint::new(1e200, 0.0);
        let q = SpherePoint::new(2e200, 0.0);
        let d = chordal_distance(p, q);
        assert!(d > 0.0 && d < 1e-199);
        assert!(chordal_distance(p, Infinity) < 1e-199);
    }

    #[test]
    fn quadratic_examples() {
        let r = solve_quadratic(c(1., 0.), c(0., 0.), c(-4., 0.)).unwrap();
        assert_eq!(r, [SpherePoint::real(-2.0), SpherePoint::real(2.0)]);
        let r = solve_quadratic(c(0., 0.), c(1., 0.), c(-3., 0.)).unwrap();
        assert_eq!(r, [SpherePoint::real(3.0), Infinity]);
        let r = solve_quadratic(c(1., 0.), c(-2., 0.), c(1., 0.)).unwrap();
        assert_eq!(r, [SpherePoint::real(1.0), SpherePoint::real(1.0)]);
        assert_eq!(
            solve_quadratic(c(0., 0.), c(0., 0.), c(0., 0.)),
            Err(SphereError::DegenerateEquation)
        );
    }

    #[test]
    fn quadratic_constant_is_double_infinity() {
        let r = solve_quadratic(c(0., 0.), c(0., 0.), c(2., 0.)).unwrap();
        assert_eq!(r, [Infinity, Infinity]);
    }

    #[test]
    fn quadratic_avoids_cancellation() {
        // Roots 1e-9 and 1e9: the naive formula loses the small one.
        let r = solve_quadratic(c(1., 0.), c(-1e9 - 1e-9, 0.), c(1., 0.)).unwrap();
        let small = r[0].finite().unwrap();
        assert!((small.re - 1e-9).abs() < 1e-22);
    }

    #[test]
    fn mobius_rejects_degenerate() {
        assert!(Mobius::new(c(1., 0.), c(2., 0.), c(2., 0.), c(4., 0.)).is_err());
    }

    #[test]
    fn mobius_group_laws() {
        let m = Mobius::new(c(1., 2.), c(0.5, -1.), c(-0.3, 0.2), c(2., 0.)).unwrap();
        let id = m.compose(&m.inverse());
        assert!(id.coefficient_distance(&Mobius::identity()) < 1e-12);
        let p = SpherePoint::new(0.3, -0.7);
        let back = m.inverse().apply(m.apply(p));
        assert!(chordal_distance(back, p) < 1e-14);
        assert_eq!(Mobius::inversion().apply(Infinity), SpherePoint::real(0.0));
        assert_eq!(Mobius::inversion().apply(SpherePoint::real(0.0)), Infinity);
    }

    #[test]
    fn sphere_point_serde() {
        let s = serde_json::to_string(&[SpherePoint::new(1.0, -2.0), Infinity]).unwrap();
        assert_eq!(s, r#"[[1.0,-2.0],"inf"]"#);
        let back: Vec<SpherePoint> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![SpherePoint::new(1.0, -2.0), Infinity]);
        assert!(serde_json::from_str::<SpherePoint>(r#""nan""#).is_err());
    }
}
