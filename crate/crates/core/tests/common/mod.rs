//! Independent oracles shared by the integration tests. None of these call
//! into the solvers they are used to check.
#![allow(dead_code)]

use num_complex::Complex64;
use reglue_kit::{QuadraticRationalMap, SpherePoint};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `Q_1(c) = c`, `Q_{n+1}(c) = Q_n(c)^2 + c` as ascending coefficients.
pub fn gleason_polynomial(n: usize) -> Vec<Complex64> {
    let mut q = vec![c(0., 0.), c(1., 0.)];
    for _ in 1..n {
        let mut sq = vec![c(0., 0.); 2 * q.len() - 1];
        for (i, a) in q.iter().enumerate() {
            for (j, b) in q.iter().enumerate() {
                sq[i + j] += a * b;
            }
        }
        sq[1] += 1.0;
        q = sq;
    }
    q
}

fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(c(0., 0.), |acc, a| acc * z + a)
}

/// All roots of a polynomial (ascending coefficients) by Weierstrass
/// (Durand-Kerner) iteration, each polished by Newton's method.
pub fn polynomial_roots(p: &[Complex64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    let lead = p[n];
    let monic: Vec<Complex64> = p.iter().map(|a| a / lead).collect();
    let seed = c(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32)).collect();
    for _ in 0..2000 {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let denom = (0..n).filter(|&j| j != i).fold(c(1., 0.), |acc, j| acc * (roots[i] - roots[j]));
            let step = horner(&monic, roots[i]) / denom;
            roots[i] -= step;
            change = change.max(step.norm());
        }
        if change < 1e-15 {
            break;
        }
    }
    let dp: Vec<Complex64> = p.iter().enumerate().skip(1).map(|(i, a)| a * i as f64).collect();
    for r in &mut roots {
        for _ in 0..5 {
            let d = horner(&dp, *r);
            if d.norm() > 0.0 {
                *r -= horner(p, *r) / d;
            }
        }
    }
    roots
}

/// Point of the unit sphere for `p` (stereographic projection).
pub fn to_sphere(p: SpherePoint) -> [f64; 3] {
    match p.finite() {
        None => [0., 0., 1.],
        Some(z) => {
            let r2 = z.norm_sqr();
            if !r2.is_finite() {
                return [0., 0., 1.];
            }
            [2. * z.re / (1. + r2), 2. * z.im / (1. + r2), (r2 - 1.) / (r2 + 1.)]
        }
    }
}

pub fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Both solutions of `N(z) = w D(z)` for finite `w`, from the quadratic
/// formula in its cancellation-free form.
pub fn preimages(m: &QuadraticRationalMap, w: Complex64) -> [SpherePoint; 2] {
    let (n, d) = (m.numerator(), m.denominator());
    let a = n[2] - w * d[2];
    let b = n[1] - w * d[1];
    let cc = n[0] - w * d[0];
    let s = (b * b - 4.0 * a * cc).sqrt();
    let s = if (b.conj() * s).re >= 0.0 { s } else { -s };
    let q = -0.5 * (b + s);
    if q.norm() == 0.0 {
        // b = 0 and a c = 0: a double root at 0 or at infinity.
        let r = if a.norm() == 0.0 { SpherePoint::Infinity } else { SpherePoint::Finite(c(0., 0.)) };
        return [r, r];
    }
    let r1 = if a.norm() == 0.0 { SpherePoint::Infinity } else { SpherePoint::Finite(q / a) };
    [r1, SpherePoint::Finite(cc / q)]
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Number of connected pieces of the full preimage of the arc through
/// `samples` (dense, in order): all preimages are placed on the sphere and
/// joined whenever closer than a few times the largest step between
/// consecutive samples, using a spatial hash.
pub fn brute_force_preimage_components(m: &QuadraticRationalMap, samples: &[Complex64]) -> usize {
    let pts: Vec<[[f64; 3]; 2]> = samples.iter().map(|&w| preimages(m, w).map(to_sphere)).collect();
    let mut step: f64 = 0.0;
    for w in pts.windows(2) {
        for a in w[0] {
            step = step.max(w[1].iter().map(|b| dist3(a, *b)).fold(f64::INFINITY, f64::min));
        }
    }
    let delta = 3.0 * step.max(1e-12);
    let flat: Vec<[f64; 3]> = pts.iter().flatten().copied().collect();
    let cell = |p: [f64; 3]| p.map(|x| (x / delta).floor() as i64);
    let mut grid: std::collections::HashMap<[i64; 3], Vec<usize>> = std::collections::HashMap::new();
    for (i, p) in flat.iter().enumerate() {
        grid.entry(cell(*p)).or_default().push(i);
    }
    let mut dsu = Dsu((0..flat.len()).collect());
    for (i, p) in flat.iter().enumerate() {
        let k = cell(*p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        for &j in bucket {
                            if j > i && dist3(*p, flat[j]) <= delta {
                                dsu.union(i, j);
                            }
                        }
                    }
                }
            }
        }
    }
    let mut roots: Vec<usize> = (0..flat.len()).map(|i| dsu.find(i)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}
