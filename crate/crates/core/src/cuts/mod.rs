//! Broken-line curves on the sphere, their pullbacks, the initial cut and
//! the finite-level model of the sphere with cuts.
//!
//! The complement at level `n` is that of `Z ∪ f⁻¹(Z) ∪ … ∪ f⁻ⁿ(Z)`, the
//! union of preimages, which is what makes `f: U_{n+1} → U_n` well defined.

mod complement;
mod complex;
mod curve;
mod export;
mod family;
mod pullback;

pub use complement::{complement_description, complement_of_curves, ComplementDescription, MIN_COMPLEMENT_RESOLUTION};
pub use complex::{build_cut_complex, edge_side_map, ArcRecord, CutComplex, LevelStats, Side, SideTransition};
pub use curve::{
    arrangement, coord, dedup_sphere, from_coord, interpolate, segment_chart, Curve, EndpointTag, DEFAULT_MAX_EDGE,
    POINT_TOL,
};
pub use export::{decode_cut_family, cut_family_svg, CutDocument};
pub use family::{build_cut_family, build_cut_family_from, CutArc, CutFamily};
pub use pullback::{
    critical_data, initial_cut, pullback_curve, reprojection_error, split_at_critical_values, two_to_one_check,
    TwoToOneReport, CRITICAL_VALUE_TOL, MIN_PARAMETER_STEP, REPROJECTION_TOL, TWO_TO_ONE_SAMPLES,
};

use thiserror::Error;

use crate::sphere::{SphereError, SpherePoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutError {
    #[error("subdivide: interior critical value at vertex {index} ({point})")]
    InteriorCriticalValue { index: usize, point: SpherePoint },
    #[error("branch continuation ambiguous at parameter {parameter} near {point}")]
    Ambiguous { parameter: f64, point: SpherePoint },
    #[error("reprojection error {0:e} exceeds tolerance")]
    Reprojection(f64),
    #[error("beta does not start at the critical value: its preimage has {components} components")]
    NotFromCriticalValue { components: usize },
    #[error("beta meets the other critical value {0}")]
    OtherCriticalValue(SpherePoint),
    #[error("initial cut self-intersects")]
    SelfIntersects,
    #[error("two-to-one check failed: {0:?}")]
    NotTwoToOne(Box<TwoToOneReport>),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("orientation test degenerate on arc {index} of level {level}")]
    DegenerateOrientation { level: usize, index: usize },
    #[error("too coarse: resolution {0} is below {MIN_COMPLEMENT_RESOLUTION}")]
    TooCoarse(usize),
    #[error("level {level} exceeds depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("invalid cut family: {0}")]
    InvalidFamily(String),
    #[error("level {level}, arc {index}: {source}")]
    AtLevel {
        level: usize,
        index: usize,
        #[source]
        source: Box<CutError>,
    },
    #[error(transparent)]
    Sphere(#[from] SphereError),
}
