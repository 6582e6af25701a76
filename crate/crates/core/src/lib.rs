//! Ordinal multiset estimates over a small ordinal scale.
//!
//! An estimate places `η` elements on `l` ordered levels (level 1 is best).
//! The crate covers the estimate space itself, the proximity-based partial
//! order, median aggregation, morphological (HMMD-style) synthesis and
//! knapsack solvers with multiset objectives.

pub mod aggregation;
pub mod decimal;
pub mod error;
pub mod estimate;
pub mod io;
pub mod knapsack;
pub mod order;
pub mod synthesis;

pub use aggregation::{
    aggregate_alternative, deviation, generalized_median, generalized_median_over,
    median_alternative, set_median, total_proximity, DeviationReport, MedianKind, MedianResult,
};
pub use decimal::Tenths;
pub use error::{Error, Result};
pub use estimate::{
    align, enumerate, integrate, multiset_coefficient, replicate, validate_estimate,
    MultisetEstimate, ScaleSpec, Validation, ValidationMode, Violation,
};
pub use order::{
    compare, compare_cumulative, compare_mixed, hasse, hasse_of, layered_order, magnitude, pareto_front,
    proximity, proximity_matrix, Comparison, PosetGraph, Proximity,
};
