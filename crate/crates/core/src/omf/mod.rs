//! Online matrix factorization for dependent data streams.
//!
//! Upon arrival of `X_t` the engine codes it against `W_{t−1}`, folds the code
//! into the aggregates `(A_t, B_t, r_t)` and re-solves the quadratic
//! dictionary problem over the (possibly non-convex) constraint set,
//! restricted to an ellipsoid that guarantees second-order growth.

pub mod aggregates;
pub mod constraint;
pub mod dictionary;
pub mod engine;
pub mod io;
pub mod sparse_code;

pub use aggregates::{AggregateStats, WeightSchedule};
pub use constraint::{ConstraintSpec, Piece};
pub use dictionary::{
    dictionary_update, ellipsoid_gap, growth_check, surrogate_loss, Dictionary, UpdateOutcome,
    UpdateParams,
};
pub use engine::{empirical_loss, sample_loss, OmfConfig, OnlineMf, StepReport};
pub use sparse_code::{coding_objective, kkt_residual, sparse_code, Code, CodingParams, SparseCoder};
