//! Degree-2 rational maps with marked critical points, and the normal forms
//! of the `Per_1(0)` and `Per_2(0)` slices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sphere::{recip, solve_quadratic, Finite, Infinity, Mobius, SphereError, SpherePoint, CHART_SWITCH};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Which of the two standard charts a coordinate lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    /// `z` itself.
    Plane,
    /// `u = 1/z`.
    Inverted,
}

/// A sphere point expressed in one of the two standard charts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: Chart,
    pub w: Complex64,
}

impl ChartPoint {
    /// The chart in which the coordinate has modulus at most 1.
    pub fn natural(p: SpherePoint) -> Self {
        match p {
            Infinity => ChartPoint { chart: Chart::Inverted, w: ZERO },
            Finite(z) if z.norm() <= 1.0 => ChartPoint { chart: Chart::Plane, w: z },
            Finite(z) => ChartPoint { chart: Chart::Inverted, w: recip(z) },
        }
    }

    pub fn to_sphere(self) -> SpherePoint {
        match self.chart {
            Chart::Plane => SpherePoint::from(self.w),
            Chart::Inverted if self.w == ZERO => Infinity,
            Chart::Inverted => SpherePoint::from(recip(self.w)),
        }
    }

    /// Re-expresses the point in `chart`, returning the derivative of the
    /// chart transition as well.
    pub fn in_chart(self, chart: Chart) -> (Complex64, Complex64) {
        if chart == self.chart {
            (self.w, ONE)
        } else {
            let inv = recip(self.w);
            (inv, -inv * inv)
        }
    }
}

fn horner(c: &[Complex64; 3], z: Complex64) -> Complex64 {
    (c[2] * z + c[1]) * z + c[0]
}

fn horner_d(c: &[Complex64; 3], z: Complex64) -> Complex64 {
    2.0 * c[2] * z + c[1]
}

fn reversed(c: &[Complex64; 3]) -> [Complex64; 3] {
    [c[2], c[1], c[0]]
}

/// A degree-2 rational map `N(z)/D(z)`; coefficient arrays are ordered by
/// ascending power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticRationalMap {
    num: [Complex64; 3],
    den: [Complex64; 3],
    c1: SpherePoint,
    c2: SpherePoint,
}

impl QuadraticRationalMap {
    /// Builds the map and marks its critical points in the canonical order
    /// (infinity first, then lexicographic).
    pub fn new(num: [Complex64; 3], den: [Complex64; 3]) -> Result<Self, SphereError> {
        Self::check_degree(&num, &den)?;
        let [a, b] = wronskian_roots(&num, &den)?;
        let (c1, c2) = match (a, b) {
            (Finite(_), Infinity) => (b, a),
            _ => (a, b),
        };
        Ok(Self { num, den, c1, c2 })
    }

    /// Builds the map and marks as `c1` the critical point closest to `hint`.
    pub fn with_marked(
        num: [Complex64; 3],
        den: [Complex64; 3],
        hint: SpherePoint,
    ) -> Result<Self, SphereError> {
        let mut m = Self::new(num, den)?;
        if crate::sphere::chordal_distance(m.c2, hint) < crate::sphere::chordal_distance(m.c1, hint) {
            std::mem::swap(&mut m.c1, &mut m.c2);
        }
        Ok(m)
    }

    fn check_degree(num: &[Complex64; 3], den: &[Complex64; 3]) -> Result<(), SphereError> {
        if num.iter().chain(den).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(SphereError::DegenerateMap);
        }
        // Resultant of the two binary quadratic forms.
        let [n0, n1, n2] = *num;
        let [d0, d1, d2] = *den;
        let res = (n2 * d0 - n0 * d2).powi(2) - (n2 * d1 - n1 * d2) * (n1 * d0 - n0 * d1);
        let scale = num.iter().chain(den).map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 || !(res.norm() > 1e-30 * scale.powi(4)) {
            return Err(SphereError::DegenerateMap);
        }
        Ok(())
    }

    pub fn numerator(&self) -> [Complex64; 3] {
        self.num
    }

    pub fn denominator(&self) -> [Complex64; 3] {
        self.den
    }

    /// The marked critical points `(c1, c2)`.
    pub fn marked(&self) -> (SpherePoint, SpherePoint) {
        (self.c1, self.c2)
    }

    pub fn c1(&self) -> SpherePoint {
        self.c1
    }

    pub fn c2(&self) -> SpherePoint {
        self.c2
    }

    /// Critical points from the zeros of the Wronskian `N'D - ND'`, listed in
    /// the order of the marks.
    pub fn critical_points(&self) -> Result<[SpherePoint; 2], SphereError> {
        let [a, b] = wronskian_roots(&self.num, &self.den)?;
        let d = crate::sphere::chordal_distance;
        if d(a, self.c1) + d(b, self.c2) <= d(b, self.c1) + d(a, self.c2) {
            Ok([a, b])
        } else {
            Ok([b, a])
        }
    }

    pub fn evaluate(&self, p: SpherePoint) -> Result<SpherePoint, SphereError> {
        let (n, d) = match p {
            Infinity => (self.num[2], self.den[2]),
            Finite(z) if z.norm() > CHART_SWITCH => {
                let u = recip(z);
                (horner(&reversed(&self.num), u), horner(&reversed(&self.den), u))
            }
            Finite(z) => (horner(&self.num, z), horner(&self.den, z)),
        };
        if n == ZERO && d == ZERO {
            return Err(SphereError::Indeterminate);
        }
        if d == ZERO {
            return Ok(Infinity);
        }
        Ok(SpherePoint::from(n / d))
    }

    /// Infallible evaluation for maps known to be in lowest terms; a
    /// numerically indeterminate value is sent to infinity.
    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        self.evaluate(p).unwrap_or(Infinity)
    }

    /// Derivative at a finite point in the plane chart (`None` at poles).
    pub fn derivative(&self, z: Complex64) -> Option<Complex64> {
        let d = horner(&self.den, z);
        if d == ZERO {
            return None;
        }
        let w = horner_d(&self.num, z) * d - horner(&self.num, z) * horner_d(&self.den, z);
        Some(w / (d * d))
    }

    /// One step of the map between natural charts: the image lands in the
    /// chart where its coordinate has modulus at most 1. Returns the image
    /// and the derivative between the two chart coordinates.
    pub fn step_chart(&self, p: ChartPoint) -> (ChartPoint, Complex64) {
        let (ns, ds) = match p.chart {
            Chart::Plane => (self.num, self.den),
            Chart::Inverted => (reversed(&self.num), reversed(&self.den)),
        };
        let n = horner(&ns, p.w);
        let d = horner(&ds, p.w);
        let dn = horner_d(&ns, p.w);
        let dd = horner_d(&ds, p.w);
        if n.norm() <= d.norm() {
            (ChartPoint { chart: Chart::Plane, w: n / d }, (dn * d - n * dd) / (d * d))
        } else {
            (ChartPoint { chart: Chart::Inverted, w: d / n }, (dd * n - d * dn) / (n * n))
        }
    }

    /// Preimages of `w` with multiplicity, sorted lexicographically.
    pub fn preimages(&self, w: SpherePoint) -> Result<[SpherePoint; 2], SphereError> {
        let [n0, n1, n2] = self.num;
        let [d0, d1, d2] = self.den;
        match w {
            Infinity => solve_quadratic(d2, d1, d0),
            Finite(w) if w.norm() > CHART_SWITCH => {
                let u = recip(w);
                solve_quadratic(d2 - u * n2, d1 - u * n1, d0 - u * n0)
            }
            Finite(w) => solve_quadratic(n2 - w * d2, n1 - w * d1, n0 - w * d0),
        }
    }

    /// `M ∘ self ∘ M⁻¹`, carrying the marks along.
    pub fn conjugate(&self, m: &Mobius) -> Result<Self, SphereError> {
        let inv = m.inverse();
        let sub = |c: &[Complex64; 3]| -> [Complex64; 3] {
            let (al, be, ga, de) = (inv.a, inv.b, inv.c, inv.d);
            // c2 X^2 + c1 X Y + c0 Y^2 with X = al z + be, Y = ga z + de.
            [
                c[2] * be * be + c[1] * be * de + c[0] * de * de,
                c[2] * 2.0 * al * be + c[1] * (al * de + be * ga) + c[0] * 2.0 * ga * de,
                c[2] * al * al + c[1] * al * ga + c[0] * ga * ga,
            ]
        };
        let p = sub(&self.num);
        let q = sub(&self.den);
        let num = [0, 1, 2].map(|i| m.a * p[i] + m.b * q[i]);
        let den = [0, 1, 2].map(|i| m.c * p[i] + m.d * q[i]);
        Self::check_degree(&num, &den)?;
        Ok(Self { num, den, c1: m.apply(self.c1), c2: m.apply(self.c2) })
    }

    /// The forward orbit `p, f(p), ..., f^n(p)`.
    pub fn orbit(&self, p: SpherePoint, n: usize) -> Vec<SpherePoint> {
        let mut out = Vec::with_capacity(n + 1);
        let mut z = p;
        out.push(z);
        for _ in 0..n {
            z = self.apply(z);
            out.push(z);
        }
        out
    }
}

fn wronskian_roots(num: &[Complex64; 3], den: &[Complex64; 3]) -> Result<[SpherePoint; 2], SphereError> {
    let [n0, n1, n2] = *num;
    let [d0, d1, d2] = *den;
    let w2 = n2 * d1 - n1 * d2;
    let w1 = 2.0 * (n2 * d0 - n0 * d2);
    let w0 = n1 * d0 - n0 * d1;
    solve_quadratic(w2, w1, w0).map_err(|_| SphereError::DegenerateMap)
}

/// A member of `Per_k(0)` in normal form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub k: u32,
    pub parameter: Complex64,
    pub map: QuadraticRationalMap,
}

/// `k = 1`: `z^2 + c` with `c1 = ∞`, `c2 = 0`.
/// `k = 2`: `a / (z^2 + 2z)` with `c1 = ∞`, `c2 = -1`.
pub fn family_member(k: u32, parameter: Complex64) -> Result<FamilyMember, SphereError> {
    let map = match k {
        1 => QuadraticRationalMap {
            num: [parameter, ZERO, ONE],
            den: [ONE, ZERO, ZERO],
            c1: Infinity,
            c2: Finite(ZERO),
        },
        2 => {
            if parameter == ZERO {
                return Err(SphereError::DegenerateParameter);
            }
            QuadraticRationalMap {
                num: [parameter, ZERO, ZERO],
                den: [ZERO, Complex64::new(2.0, 0.0), ONE],
                c1: Infinity,
                c2: Finite(-ONE),
            }
        }
        other => return Err(SphereError::PeriodNotImplemented(other)),
    };
    QuadraticRationalMap::check_degree(&map.num, &map.den).map_err(|_| SphereError::DegenerateParameter)?;
    Ok(FamilyMember { k, parameter, map })
}

impl FamilyMember {
    /// The critical value of the free critical point.
    pub fn free_critical_value(&self) -> SpherePoint {
        self.map.apply(self.map.c2())
    }
}
