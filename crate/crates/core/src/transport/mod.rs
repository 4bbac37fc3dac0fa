//! Word measures, exact transport distances, the dual operator and the
//! fixed-point solver for the Gibbs state.

mod gibbs;
mod measure;
pub mod solver;
mod wasserstein;

pub use gibbs::{
    certify_contraction, contraction_alpha, dirac_pairs, dual_apply, dual_apply_n, metric_for, min_diagonal_mass,
    solve_gibbs, word_distance, ContractionCertificate, ContractionViolation, GibbsOptions, GibbsSolution,
    NORMALIZATION_TOL,
};
pub use measure::{cylinder_mass, WordMeasure, MASS_TOL};
pub use solver::{SolverRegistry, TransportProblem, TransportSolution, TransportSolver};
pub use wasserstein::{
    diagonal_mass, optimal_plan, wasserstein, wasserstein_with_cost, Coupling, GroundCost, GroundMetric,
    WassersteinValue, DUALITY_GAP_TOL, MARGINAL_TOL,
};
