//! Cycle detection, basin rasters, the capture test for the free critical
//! point, centers of hyperbolic components and parameter scans.

mod basin;
mod center;
mod cycle;
mod free;
mod scan;

pub use basin::{basin_label, basin_label_with, BasinRaster, ComponentSearch, PixelClassifier, PIXEL_EPS, PIXEL_MAX_ITER};
pub use center::{find_center, find_misiurewicz, find_periodic_center, CenterSolution, CENTER_RESIDUAL};
pub use cycle::{cycle_multiplier, detect_cycle, Cycle, DEFAULT_MAX_ITER, MAX_PERIOD};
pub use free::{
    classify_free_critical, superattracting_signature, Classification, ClassificationTag, Evidence, Signature,
    SignatureEntry, CAPTURE_CONFIRM_EPS, CAPTURE_ENTRY_EPS, LANDING_TOL,
};
pub use scan::{param_scan, scan_cell, ScanCell, ScanOptions, Window};

use thiserror::Error;

use crate::sphere::SphereError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("refinement failed for period-{period} cycle near {near}")]
    RefinementFailed { period: usize, near: crate::sphere::SpherePoint, unrefined: Vec<crate::sphere::SpherePoint> },
    #[error("cycle is not attracting (|multiplier| = {0})")]
    NotAttracting(f64),
    #[error("newton failed to converge after {iterations} steps (last iterate {last})")]
    NoConvergence { iterations: usize, last: num_complex::Complex64 },
    #[error("degenerate center at {0}")]
    DegenerateCenter(num_complex::Complex64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Sphere(#[from] SphereError),
}
