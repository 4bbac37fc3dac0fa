//! Martingale decomposition, variance and sampling.

mod decomposition;
mod empirical;
mod sampler;
mod variance;

pub use decomposition::{
    build_decomposition, center, coboundary_test, conditional_expectation, depends_only_after, CoboundaryVerdict,
    MartingaleDecomposition, GAP_MARGIN, MAX_SERIES_TERMS,
};
pub use empirical::{
    block_statistics, empirical_clt, kolmogorov_tail, ks_normal, CltReport, Histogram, KsResult, MIN_SAMPLES,
};
pub use sampler::{block_rng, default_burn_in, sample_orbit, GibbsSampler};
pub use variance::{green_kubo_variance, terms_for_tolerance, VarianceReport};
