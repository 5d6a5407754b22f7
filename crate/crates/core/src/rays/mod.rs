//! Böttcher coordinates at super-attracting points, internal and external
//! rays, and the arc `β` from an internal ray landing at the free critical
//! value.

mod beta;
mod boettcher;
mod trace;

pub use beta::{beta_boundary_case, lift_from, BoundaryBeta, CRITICAL_VALUE_ESCAPE_ITER};
pub use boettcher::{boettcher, BoettcherData};
pub use trace::{doubling_period, landing_point, ray_target, trace_ray, Ray, LANDING_LEVELS, LANDING_TOL};

use thiserror::Error;

use crate::cuts::CutError;
use crate::sphere::{SphereError, SpherePoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RayError {
    #[error("{point} is not a super-attracting periodic point (derivative {derivative:e})")]
    NotSuperattracting { point: SpherePoint, derivative: f64 },
    #[error("local degree at {point} is not 2")]
    LocalDegree { point: SpherePoint },
    #[error("ray corrector diverged after potential {last_potential}")]
    CorrectorDiverged { last_potential: f64 },
    #[error("landing extrapolation did not settle")]
    LandingDiverged,
    #[error("landing point is {distance:e} away from the critical value")]
    LandingMissed { distance: f64 },
    #[error("critical value lies in the basin (entered after {iterations} iterations)")]
    CriticalValueInBasin { iterations: usize },
    #[error("no probe near the critical value converges to the marked cycle")]
    NoConvergingProbe,
    #[error("lifted path misses its start by {0:e}")]
    LiftMismatch(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error(transparent)]
    Sphere(#[from] SphereError),
}
