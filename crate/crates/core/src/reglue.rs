//! Cutting the plane along `[-1, 1]` and opening the cut into the unit
//! circle, with the inverse that glues it back.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `|z|` may fall below 1 by this much before `close_cut` rejects it.
pub const CIRCLE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReglueError {
    #[error("point {0} is inside the circle")]
    InsideCircle(Complex64),
    #[error("point {0} lies on the cut and needs a side")]
    MissingSide(Complex64),
    #[error("point {0} is off the cut and cannot carry a side")]
    SpuriousSide(Complex64),
    #[error("point {0} is not finite")]
    NotFinite(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutSide {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// A point of the plane cut along `[-1, 1]`: points of the open cut carry
/// the side they are approached from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutPlanePoint {
    pub w: Complex64,
    pub side: Option<CutSide>,
}

fn on_open_cut(w: Complex64) -> bool {
    w.im == 0.0 && w.re.abs() < 1.0
}

impl CutPlanePoint {
    pub fn new(w: Complex64, side: Option<CutSide>) -> Result<Self, ReglueError> {
        if !w.is_finite() {
            return Err(ReglueError::NotFinite(w));
        }
        let on_cut = w.im == 0.0 && w.re.abs() <= 1.0;
        match side {
            None if on_open_cut(w) => Err(ReglueError::MissingSide(w)),
            Some(_) if !on_cut => Err(ReglueError::SpuriousSide(w)),
            // The cut ends at ±1; a side there is redundant.
            Some(_) if !on_open_cut(w) => Ok(Self { w, side: None }),
            _ => Ok(Self { w, side }),
        }
    }

    pub fn off_cut(w: Complex64) -> Result<Self, ReglueError> {
        Self::new(w, None)
    }
}

/// Inverse Joukowski map onto `|z| >= 1`, with `z ~ 2w` at infinity; the two
/// sides of the cut open to the upper and lower unit semicircle, points
/// above each other getting equal real parts.
pub fn open_cut(p: CutPlanePoint) -> Complex64 {
    let w = p.w;
    match p.side {
        Some(side) => {
            let y = (1.0 - w.re * w.re).max(0.0).sqrt();
            match side {
                CutSide::Plus => Complex64::new(w.re, y),
                CutSide::Minus => Complex64::new(w.re, -y),
            }
        }
        None => w + (w - 1.0).sqrt() * (w + 1.0).sqrt(),
    }
}

/// `w = (z + 1/z)/2`; points of the unit circle return to the cut with the
/// side given by the sign of `Im z`.
pub fn close_cut(z: Complex64) -> Result<CutPlanePoint, ReglueError> {
    if !z.is_finite() {
        return Err(ReglueError::NotFinite(z));
    }
    let r = z.norm();
    if r < 1.0 - CIRCLE_TOL {
        return Err(ReglueError::InsideCircle(z));
    }
    if r <= 1.0 + CIRCLE_TOL {
        let x = (z.re / r).clamp(-1.0, 1.0);
        let side = if x.abs() == 1.0 || z.im == 0.0 {
            None
        } else if z.im > 0.0 {
            Some(CutSide::Plus)
        } else {
            Some(CutSide::Minus)
        };
        return Ok(CutPlanePoint { w: Complex64::new(x, 0.0), side });
    }
    Ok(CutPlanePoint { w: 0.5 * (z + z.inv()), side: None })
}

/// Paired point clouds for plotting: a seeded random sample of the cut
/// plane in `[-2, 2]²`, plus both sides of the cut, and their images.
pub fn demo_clouds(samples: usize, seed: u64) -> Vec<(CutPlanePoint, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples + 2 * samples / 4);
    for _ in 0..samples {
        let w = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if let Ok(p) = CutPlanePoint::off_cut(w) {
            out.push((p, open_cut(p)));
        }
    }
    let on_cut = samples / 4;
    for i in 0..on_cut {
        let x = -1.0 + 2.0 * (i as f64 + 0.5) / on_cut as f64;
        for side in [CutSide::Plus, CutSide::Minus] {
            let p = CutPlanePoint { w: Complex64::new(x, 0.0), side: Some(side) };
            out.push((p, open_cut(p)));
        }
    }
    out
}

/// CSV with columns `w_re,w_im,side,z_re,z_im`.
pub fn demo_csv(points: &[(CutPlanePoint, Complex64)]) -> String {
    let mut out = String::from("w_re,w_im,side,z_re,z_im\n");
    for (p, z) in points {
        let side = match p.side {
            Some(CutSide::Plus) => "+",
            Some(CutSide::Minus) => "-",
            None => "",
        };
        out.push_str(&format!("{:.17e},{:.17e},{},{:.17e},{:.17e}\n", p.w.re, p.w.im, side, z.re, z.im));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn examples() {
        assert!((open_cut(CutPlanePoint::off_cut(c(1.25, 0.)).unwrap()) - c(2., 0.)).norm() < 1e-15);
        assert!((open_cut(CutPlanePoint::off_cut(c(-1.25, 0.)).unwrap()) - c(-2., 0.)).norm() < 1e-15);
        assert_eq!(open_cut(CutPlanePoint::new(c(0., 0.), Some(CutSide::Plus)).unwrap()), c(0., 1.));
        assert_eq!(open_cut(CutPlanePoint::off_cut(c(1., 0.)).unwrap()), c(1., 0.));
        let p = close_cut(c(2., 0.)).unwrap();
        assert!((p.w - c(1.25, 0.)).norm() < 1e-15 && p.side.is_none());
        assert_eq!(close_cut(c(0., 1.)).unwrap(), CutPlanePoint { w: c(0., 0.), side: Some(CutSide::Plus) });
        assert!(matches!(close_cut(c(0.5, 0.)), Err(ReglueError::InsideCircle(_))));
    }

    #[test]
    fn validation() {
        assert!(matches!(CutPlanePoint::off_cut(c(0.5, 0.)), Err(ReglueError::MissingSide(_))));
        assert!(matches!(CutPlanePoint::new(c(0.5, 0.1), Some(CutSide::Plus)), Err(ReglueError::SpuriousSide(_))));
        assert_eq!(CutPlanePoint::new(c(-1., 0.), Some(CutSide::Minus)).unwrap().side, None);
    }

    #[test]
    fn continuous_up_to_the_cut() {
        for x in [-0.9, -0.3, 0.0, 0.4, 0.95] {
            let above = open_cut(CutPlanePoint::off_cut(c(x, 1e-12)).unwrap());
            let below = open_cut(CutPlanePoint::off_cut(c(x, -1e-12)).unwrap());
            assert!((above - open_cut(CutPlanePoint::new(c(x, 0.), Some(CutSide::Plus)).unwrap())).norm() < 1e-6);
            assert!((below - open_cut(CutPlanePoint::new(c(x, 0.), Some(CutSide::Minus)).unwrap())).norm() < 1e-6);
        }
    }

    #[test]
    fn demo_is_deterministic() {
        let a = demo_csv(&demo_clouds(40, 7));
        assert_eq!(a, demo_csv(&demo_clouds(40, 7)));
        assert_eq!(a.lines().count(), 1 + 40 + 20);
    }
}
