//! Desk-scale toolkit for cutting and regluing quadratic rational maps.

// Negated comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod classify;
pub mod config;
pub mod cuts;
pub mod geometry;
pub mod maps;
pub mod raster;
pub mod rays;
pub mod reglue;
pub mod sphere;
pub mod spider;
pub mod svg;

pub use maps::{family_member, Chart, ChartPoint, FamilyMember, QuadraticRationalMap};
pub use sphere::{chordal_distance, solve_quadratic, Mobius, SphereError, SpherePoint};
