//! Gibbs states of normalized potentials on one-sided lattice systems with a
//! general alphabet and markovian admissibility rules, computed by iterating
//! the dual transfer operator and certified through Wasserstein contraction.
//!
//! The pipeline runs on a finite spin grid. Functions and measures are kept
//! at a fixed word depth, so every operator acts on explicit vectors.

pub mod clt;
pub mod config_space;
pub mod diagnostics;
pub mod error;
pub mod fixtures;
pub mod transfer;
pub mod transport;

pub use error::{GibbsError, Result};
