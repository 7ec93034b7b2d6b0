//! Self-contained linear-programming and polyhedral-cone kernel.
//!
//! The kernel provides exactly what the variational layers need at desk
//! scale (dimension <= ~30 after lifting, a few dozen rows):
//!
//! * a dense two-phase simplex with Bland's anti-cycling rule — every solve
//!   returns a vertex, row duals with a checked duality residual, a Farkas
//!   certificate on infeasibility, or a verified ray on unboundedness;
//! * an incremental-construction builder ([`LpBuilder`]) used by the norm
//!   epigraph encodings;
//! * nonnegative least squares (Lawson–Hanson) for Euclidean cone
//!   projections;
//! * finitely generated cones with membership, distance, intersection and
//!   polarity via the double-description method.
//!
//! Double precision with explicit residual checks is used throughout rather
//! than exact rational arithmetic; all tolerances come from [`crate::tol`].

mod builder;
mod cone;
mod linalg;
mod lp;
mod nnls;

pub use builder::{Lin, LpBuilder};
pub use cone::{
    cone_contains, cone_distance, cone_distance_euclid, cone_from_halfspaces, cone_intersect,
    cone_polar, polytope_vertices, Cone, ConeDistance,
};
pub use lp::{
    polyhedron_feasible, solve_lp, Feasibility, LinearProgram, LpOutcome, LpSolution, Sense,
};
pub(crate) use linalg::{lstsq, rank};
pub use nnls::nnls;

use alloc::string::String;
use thiserror::Error;

/// Errors surfaced by the kernel.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("linear program has no constraints and an unbounded objective")]
    NoConstraints,
    #[error("iteration limit reached after {0} pivots")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cone generators must be nonzero")]
    ZeroGenerator,
    #[error("unsupported norm for this operation: {0}")]
    UnsupportedNorm(String),
}
