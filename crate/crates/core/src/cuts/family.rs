use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::Curve;
use super::pullback::{pullback_curve, split_at_critical_values};
use super::CutError;
use crate::maps::QuadraticRationalMap;
use crate::sphere::chordal_distance;

/// Parent reprojection tolerance for a valid family.
const FAMILY_REPROJECTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutArc {
    pub level: usize,
    pub index: usize,
    /// Index of the level below whose (piece of) curve this arc maps onto.
    pub parent: Option<usize>,
    pub curve: Curve,
}

/// `Z, f⁻¹(Z), …, f⁻ᵈᵉᵖᵗʰ(Z)` as arcs, level by level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutFamily {
    pub map: QuadraticRationalMap,
    pub depth: usize,
    pub levels: Vec<Vec<CutArc>>,
}

pub fn build_cut_family(m: &QuadraticRationalMap, z: &Curve, depth: usize) -> Result<CutFamily, CutError> {
    build_cut_family_from(m, std::slice::from_ref(z), depth)
}

/// As [`build_cut_family`] for an initial cut made of several arcs.
pub fn build_cut_family_from(
    m: &QuadraticRationalMap,
    initial: &[Curve],
    depth: usize,
) -> Result<CutFamily, CutError> {
    let mut levels: Vec<Vec<CutArc>> = vec![initial
        .iter()
        .enumerate()
        .map(|(index, curve)| CutArc { level: 0, index, parent: None, curve: curve.clone() })
        .collect()];
    for level in 0..depth {
        let lifted: Vec<Result<Vec<Curve>, CutError>> = levels[level]
            .par_iter()
            .map(|arc| {
                let mut out = Vec::new();
                for piece in split_at_critical_values(m, &arc.curve)? {
                    out.extend(pullback_curve(m, &piece)?);
                }
                Ok(out)
            })
            .collect();
        let mut next = Vec::new();
        for (parent, res) in lifted.into_iter().enumerate() {
            let curves =
                res.map_err(|e| CutError::AtLevel { level, index: parent, source: Box::new(e) })?;
            for curve in curves {
                next.push(CutArc { level: level + 1, index: next.len(), parent: Some(parent), curve });
            }
        }
        levels.push(next);
    }
    Ok(CutFamily { map: *m, depth, levels })
}

impl CutFamily {
    pub fn arc_counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn arcs(&self) -> impl Iterator<Item = &CutArc> {
        self.levels.iter().flatten()
    }

    /// Checks the structural invariants: level and index bookkeeping,
    /// parents, edge refinement, and that every vertex of a level-`n+1` arc
    /// maps within `1e-6` of its parent.
    pub fn validate(&self) -> Result<(), CutError> {
        let bad = |msg: String| Err(CutError::InvalidFamily(msg));
        let m = QuadraticRationalMap::with_marked(self.map.numerator(), self.map.denominator(), self.map.c1())?;
        if chordal_distance(m.c1(), self.map.c1()) > 1e-9 || chordal_distance(m.c2(), self.map.c2()) > 1e-9 {
            return bad("marked points are not the critical points of the map".into());
        }
        if self.levels.len() != self.depth + 1 {
            return bad(format!("{} levels for depth {}", self.levels.len(), self.depth));
        }
        for (level, arcs) in self.levels.iter().enumerate() {
            for (index, arc) in arcs.iter().enumerate() {
                if arc.level != level || arc.index != index {
                    return bad(format!("arc at {level}/{index} is labelled {}/{}", arc.level, arc.index));
                }
                let cv = &arc.curve;
                if cv.vertices.len() < 2 || !(cv.max_edge > 0.0) {
                    return bad(format!("arc {level}/{index} is degenerate"));
                }
                if cv.max_edge_length() > cv.max_edge * (1.0 + 1e-9) {
                    return bad(format!("arc {level}/{index} has an edge longer than its bound"));
                }
                match (level, arc.parent) {
                    (0, None) => {}
                    (0, Some(_)) => return bad(format!("initial arc {index} has a parent")),
                    (_, None) => return bad(format!("arc {level}/{index} has no parent")),
                    (_, Some(p)) => {
                        let Some(parent) = self.levels[level - 1].get(p) else {
                            return bad(format!("arc {level}/{index} has missing parent {p}"));
                        };
                        let err = super::pullback::reprojection_error(&self.map, cv, &parent.curve);
                        if !(err < FAMILY_REPROJECTION_TOL) {
                            return bad(format!("arc {level}/{index} reprojects with error {err:e}"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
