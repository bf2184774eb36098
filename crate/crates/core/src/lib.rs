//! Subgradient methods with Polyak-type steps, projection methods for convex
//! feasibility, and the exact last-iterate rates of both.
//!
//! Piece and set indices are zero-based; iteration counters `k` in traces are
//! one-based, so record `k` holds `x^k`.

pub mod error;
pub mod feasibility;
pub mod generate;
pub mod linalg;
pub mod oracles;
pub mod solvers;
pub mod theory;

pub use error::{Error, Result};
pub use feasibility::{
    alternating_projection, greedy_method, FeasRecord, FeasTrace, FeasibilityInstance,
    GreedyVariant,
};
pub use oracles::{
    max_distance_set, AffinePiece, MaxDistanceOracle, PiecewiseAffine, PiecewiseAffineOracle,
    ProjectableSet, SubgradientOracle,
};
pub use solvers::{
    is_fejer_monotone, momentum_polyak_method, step_size, subgradient_method, RunTrace, StepRecord,
    StepSchedule,
};
pub use theory::{
    build_altproj_tight_instance, build_feasibility_resisting_instance,
    build_polyak_tight_instance, certificate_lemma1, rate_altproj, rate_optimal, rate_polyak,
    Certificate,
};
