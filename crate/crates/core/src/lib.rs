//! Image segmentation by evolving a closed polygonal contour.
//!
//! A counterclockwise polygon moves in the normal direction with speed
//! `curvature + F`, where `F` is an external force derived from a
//! grayscale image: dark background pushes the contour inward until it
//! locks onto a bright object's boundary. Vertices are simultaneously
//! redistributed along the curve so that resolution concentrates where
//! curvature is high.
//!
//! The pieces:
//!
//! - [`geometry`]: closed polygonal curves and their discrete per-edge
//!   quantities (lengths, signed curvatures, unwrapped tangent angles)
//!   plus the dual cells used by the finite-volume scheme.
//! - [`force`]: grayscale images as piecewise-constant force fields over
//!   a rectangular domain, PGM reading/writing, synthetic test bitmaps.
//! - [`redistribution`]: curvature-weighted tangential speeds solved in
//!   closed form from a periodic recurrence.
//! - [`evolution`]: the semi-implicit step with its adaptive, stability
//!   guaranteeing time increment, and the run loop with combinable
//!   stopping criteria.
//!
//! The expensive per-step work is a cyclic tridiagonal solve, O(N) per
//! step. Bitmap synthesis parallelizes across rows behind the `parallel`
//! feature (enabled by default); the evolution loop itself is sequential
//! by nature, each step depending on the previous one.

pub mod evolution;
pub mod force;
pub mod geometry;
pub mod redistribution;

pub use evolution::{
    run, run_with_observer, step, EvolutionError, EvolutionState, RunOutcome, StepDiagnostics,
    StopReason, StoppingCriterion,
};
pub use force::{Domain, Force, ForceField, IntensityGrid, UniformForce, OMEGA};
pub use geometry::{GeometryError, PolygonalCurve, Vec2};
pub use redistribution::{RedistributionError, RedistributionParams};
