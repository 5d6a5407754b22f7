use serde::{Deserialize, Serialize};

use super::complex::CutComplex;
use super::family::CutFamily;
use super::CutError;
use crate::svg::{render, Layer, PALETTE};

/// JSON document for a cut family: map, levels of arcs with vertices and
/// parents, and, when computed, the complex with its side transitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutDocument {
    pub family: CutFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex: Option<CutComplex>,
}

/// Parses a [`CutDocument`] or a bare [`CutFamily`] and validates it.
pub fn decode_cut_family(text: &str) -> Result<CutFamily, CutError> {
    let family = match serde_json::from_str::<CutDocument>(text) {
        Ok(doc) => doc.family,
        Err(_) => serde_json::from_str::<CutFamily>(text).map_err(|e| CutError::InvalidFamily(e.to_string()))?,
    };
    family.validate()?;
    Ok(family)
}

/// One path per arc, one color per level.
pub fn cut_family_svg(cf: &CutFamily, half_width: f64) -> String {
    let layers: Vec<Layer<'_>> = cf
        .levels
        .iter()
        .enumerate()
        .map(|(level, arcs)| Layer {
            id: format!("level-{level}"),
            color: PALETTE[level % PALETTE.len()].to_string(),
            curves: arcs.iter().map(|a| &a.curve).collect(),
        })
        .collect();
    render(&layers, half_width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuts::{build_cut_complex, build_cut_family, initial_cut, Curve};
    use crate::maps::family_member;
    use num_complex::Complex64;

    #[test]
    fn json_round_trip() {
        let m = family_member(1, Complex64::new(0., 0.)).unwrap().map;
        let z = initial_cut(&m, &Curve::segment(Complex64::new(0., 0.), Complex64::new(1., 0.)).unwrap()).unwrap();
        let family = build_cut_family(&m, &z, 1).unwrap();
        let complex = Some(build_cut_complex(&family).unwrap());
        let doc = CutDocument { family: family.clone(), complex };
        let text = serde_json::to_string(&doc).unwrap();
        assert_eq!(decode_cut_family(&text).unwrap(), family);
        let bare = serde_json::to_string(&family).unwrap();
        assert_eq!(decode_cut_family(&bare).unwrap(), family);
        assert!(decode_cut_family("{").is_err());
        let svg = cut_family_svg(&family, 2.0);
        assert_eq!(svg.matches("<path").count(), 3);
    }
}
