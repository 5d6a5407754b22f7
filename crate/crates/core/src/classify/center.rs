use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::sphere::{chordal_distance, Finite, Infinity, SpherePoint};

const MAX_NEWTON: usize = 100;
/// A converged center must satisfy its landing condition to this chordal accuracy.
pub const CENTER_RESIDUAL: f64 = 1e-12;
const DEGENERATE_RADIUS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterSolution {
    pub parameter: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `(Q_n(c), Q_n'(c))` for the critical orbit `Q_1 = c`, `Q_{j+1} = Q_j^2 + c`.
fn poly_orbit(c: Complex64, n: usize) -> (Complex64, Complex64) {
    let (mut q, mut dq) = (c, one());
    for _ in 1..n {
        dq = 2.0 * q * dq + 1.0;
        q = q * q + c;
    }
    (q, dq)
}

/// Homogeneous orbit of `-1` under `[X:Y] -> [aY^2 : X^2 + 2XY]`, rescaled each
/// step. Returns `(X, Y, dX/da, dY/da)` after `n` steps.
fn per2_orbit(a: Complex64, n: usize) -> (Complex64, Complex64, Complex64, Complex64) {
    let (mut x, mut y) = (-one(), one());
    let (mut dx, mut dy) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for _ in 0..n {
        let nx = a * y * y;
        let ny = x * x + 2.0 * x * y;
        let ndx = y * y + 2.0 * a * y * dy;
        let ndy = 2.0 * x * dx + 2.0 * (dx * y + x * dy);
        let s = nx.norm().max(ny.norm());
        let s = if s > 0.0 { s } else { 1.0 };
        x = nx / s;
        y = ny / s;
        dx = ndx / s;
        dy = ndy / s;
    }
    (x, y, dx, dy)
}

fn ratio(x: Complex64, y: Complex64) -> SpherePoint {
    if y.norm() == 0.0 {
        Infinity
    } else {
        SpherePoint::from(x / y)
    }
}

fn newton(
    guess: Complex64,
    mut eval: impl FnMut(Complex64) -> (Complex64, Complex64),
    residual: impl Fn(Complex64) -> f64,
) -> Result<CenterSolution, ClassifyError> {
    let mut p = guess;
    let mut iterations = 0;
    for i in 0..MAX_NEWTON {
        iterations = i + 1;
        let (g, dg) = eval(p);
        if g.norm() == 0.0 {
            break;
        }
        let step = g / dg;
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Err(ClassifyError::NoConvergence { iterations, last: p });
        }
        p -= step;
        if step.norm() <= 1e-15 * p.norm().max(1.0) {
            break;
        }
    }
    let r = residual(p);
    if r < CENTER_RESIDUAL {
        Ok(CenterSolution { parameter: p, residual: r, iterations })
    } else {
        Err(ClassifyError::NoConvergence { iterations, last: p })
    }
}

/// Newton's method for a parameter at which the free critical point lands
/// on the marked cycle after exactly `landing_time` steps.
///
/// For `k = 1` this solves `f_c^n(0) = 0`; for `k = 2` the orbit of `-1`
/// must reach `infinity` or `0`, whichever the guess is nearer to.
pub fn find_center(k: u32, landing_time: usize, guess: Complex64) -> Result<CenterSolution, ClassifyError> {
    if landing_time == 0 {
        return Err(ClassifyError::InvalidArgument("landing time must be at least 1".into()));
    }
    let sol = match k {
        1 => newton(guess, |c| poly_orbit(c, landing_time), |c| {
            chordal_distance(Finite(poly_orbit(c, landing_time).0), Finite(Complex64::new(0.0, 0.0)))
        })?,
        2 => {
            let (x, y, _, _) = per2_orbit(guess, landing_time);
            let to_infinity = x.norm() > y.norm();
            let target = if to_infinity { Infinity } else { SpherePoint::real(0.0) };
            newton(
                guess,
                |a| {
                    let (x, y, dx, dy) = per2_orbit(a, landing_time);
                    if to_infinity { (y, dy) } else { (x, dx) }
                },
                |a| {
                    let (x, y, _, _) = per2_orbit(a, landing_time);
                    chordal_distance(ratio(x, y), target)
                },
            )?
        }
        other => return Err(ClassifyError::InvalidArgument(format!("family k={other} is not implemented"))),
    };
    // a = 0 is never admissible; c = 0 only for landing time 1.
    if sol.parameter.norm() < DEGENERATE_RADIUS && (k == 2 || landing_time > 1) {
        return Err(ClassifyError::DegenerateCenter(sol.parameter));
    }
    Ok(sol)
}

/// Newton's method for a parameter at which the free critical point is
/// periodic with period dividing `period`.
pub fn find_periodic_center(k: u32, period: usize, guess: Complex64) -> Result<CenterSolution, ClassifyError> {
    match k {
        1 => find_center(1, period, guess),
        2 => {
            if period == 0 {
                return Err(ClassifyError::InvalidArgument("period must be at least 1".into()));
            }
            let sol = newton(
                guess,
                |a| {
                    let (x, y, dx, dy) = per2_orbit(a, period);
                    (x + y, dx + dy)
                },
                |a| {
                    let (x, y, _, _) = per2_orbit(a, period);
                    chordal_distance(ratio(x, y), SpherePoint::real(-1.0))
                },
            )?;
            if sol.parameter.norm() < DEGENERATE_RADIUS {
                return Err(ClassifyError::DegenerateCenter(sol.parameter));
            }
            Ok(sol)
        }
        other => Err(ClassifyError::InvalidArgument(format!("family k={other} is not implemented"))),
    }
}

/// Newton's method in the polynomial family for a parameter whose critical
/// value `c` is strictly preperiodic: `f^preperiod(c)` is periodic with
/// period dividing `period`.
pub fn find_misiurewicz(preperiod: usize, period: usize, guess: Complex64) -> Result<CenterSolution, ClassifyError> {
    if period == 0 {
        return Err(ClassifyError::InvalidArgument("period must be at least 1".into()));
    }
    let l = preperiod + 1;
    let g = move |c: Complex64| {
        let (a, da) = poly_orbit(c, l + period);
        let (b, db) = poly_orbit(c, l);
        (a - b, da - db)
    };
    let sol = newton(guess, g, |c| {
        chordal_distance(Finite(poly_orbit(c, l + period).0), Finite(poly_orbit(c, l).0))
    })?;
    if sol.parameter.norm() < DEGENERATE_RADIUS {
        return Err(ClassifyError::DegenerateCenter(sol.parameter));
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basilica_center() {
        let s = find_center(1, 2, c(-0.9, 0.1)).unwrap();
        assert!((s.parameter - c(-1., 0.)).norm() < 1e-14);
    }

    #[test]
    fn per2_landing_time_two() {
        let s = find_center(2, 2, c(1.9, 0.1)).unwrap();
        assert!((s.parameter - c(2., 0.)).norm() < 1e-12);
    }

    #[test]
    fn degenerate_root_is_reported() {
        assert!(matches!(find_center(1, 3, c(1e-3, 0.)), Err(ClassifyError::DegenerateCenter(_))));
        assert!(find_center(1, 1, c(0.1, 0.)).is_ok());
    }

    #[test]
    fn misiurewicz_at_i() {
        let s = find_misiurewicz(1, 2, c(0.05, 0.95)).unwrap();
        assert!((s.parameter - c(0., 1.)).norm() < 1e-13);
    }

    #[test]
    fn per2_periodic_center() {
        // -1 -> a/(-1) = -a; period 1 needs a = 1: z = -1 fixed.
        let s = find_periodic_center(2, 1, c(0.9, 0.1)).unwrap();
        assert!((s.parameter - c(1., 0.)).norm() < 1e-13);
    }
}
