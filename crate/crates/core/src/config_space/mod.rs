//! The discretized configuration space: spin grid, admissibility structure,
//! word enumeration, cylinders and the sequence metrics.

mod cylinder;
mod grid;
mod metric;
mod mixing;
mod system;
mod words;

pub use cylinder::CylinderSet;
pub use grid::SpinGrid;
pub use metric::{bounded_distance, choose_delta, seq_distance, truncated_distance, MetricConfig, TruncatedDistance};
pub use mixing::mixing_exponent;
pub use system::{AdmissibilitySystem, ConstraintSet, Interval, INTERVAL_TOL};
pub use words::{enumerate_words, projected_word_counts, AdmissibleWordTable, WordSpace, DEFAULT_WORD_BUDGET};
