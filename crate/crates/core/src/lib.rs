//! Boundary-integral solver and experiment harness for the electrostatic
//! field between two close-to-touching perfectly conducting (or insulating)
//! inclusions in the plane.
//!
//! The pipeline: place two strictly convex curves at a prescribed gap,
//! discretize their boundaries with spectral Nyström grids, assemble the
//! block Neumann–Poincaré operator, construct the eigenfunction at
//! eigenvalue 1/2 and its single-layer potential (the singular function),
//! solve the exterior problem for a given harmonic background, and measure
//! how the gap-field gradient splits into an explicit singular part plus a
//! bounded remainder as the gap closes.

pub mod discretization;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod potentials;
pub mod singular;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{closest_points, place_at_gap, Curve, CurveKind, InclusionPair, Vec2};
