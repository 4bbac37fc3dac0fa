//! Locally constant functions, the Ruelle operator and its normalization.

mod eigen;
mod function;
mod gap;
mod lasota_yorke;
mod lipschitz;
mod ruelle;

pub use eigen::{leading_eigendata, normalize, normalize_potential, NormalizationData, DEFAULT_EIGEN_ITERS, DEFAULT_EIGEN_TOL};
pub use function::DepthKFunction;
pub use gap::{default_probes, spectral_gap_estimate, GapEstimate};
pub use lasota_yorke::{lasota_yorke_check, LasotaYorkeReport};
pub use lipschitz::{lipschitz_of_exp, lipschitz_seminorm, projection_error};
pub use ruelle::{apply_ruelle, ergodic_sum, TransferOperator};
