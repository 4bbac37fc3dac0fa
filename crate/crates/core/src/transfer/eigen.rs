use serde::{Deserialize, Serialize};

use super::function::DepthKFunction;
use super::ruelle::TransferOperator;
use crate::config_space::WordSpace;
use crate::error::{GibbsError, Result};

pub const DEFAULT_EIGEN_TOL: f64 = 1e-12;
pub const DEFAULT_EIGEN_ITERS: usize = 10_000;

/// Leading eigendata `L_φ h = λ h` used to normalize a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationData {
    pub lambda: f64,
    pub h: DepthKFunction,
    /// `‖L_φ h − λ h‖_∞`.
    pub residual: f64,
    pub iterations: usize,
}

impl NormalizationData {
    /// Eigendata of an already normalized potential.
    pub fn trivial(space: &WordSpace, residual: f64) -> Self {
        NormalizationData {
            lambda: 1.0,
            h: DepthKFunction::constant(space, 1.0),
            residual,
            iterations: 0,
        }
    }
}

/// ν-product weighted average of `h`; the eigenfunction is scaled so this is one.
fn nu_average(space: &WordSpace, h: &DepthKFunction) -> f64 {
    let grid = space.grid();
    let table = space.table(h.depth());
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, &v) in table.words().zip(h.values()) {
        let weight: f64 = w.iter().map(|&a| grid.nu(a as usize)).product();
        num += weight * v;
        den += weight;
    }
    num / den
}

/// Power iteration for the leading eigenvalue and eigenfunction of `L_φ`,
/// started from `h ≡ 1`.
pub fn leading_eigendata(op: &TransferOperator<'_>, tol: f64, max_iters: usize) -> Result<NormalizationData> {
    let space = op.space();
    let depth = op.potential().depth();
    let mut h = DepthKFunction::constant(space, 1.0).embed(space, depth)?;
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iters {
        let lh = op.apply(&h)?.embed(space, depth)?;
        let scale = nu_average(space, &lh);
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(GibbsError::NoConvergence { iterations: it, residual });
        }
        // λ h_new = L h  with the current normalization of h
        let next = lh.scale(1.0 / scale);
        lambda = scale / nu_average(space, &h);
        residual = lh.sub(&h.scale(lambda), space)?.sup_norm();
        h = next;
        if residual <= tol {
            let lh = op.apply(&h)?.embed(space, depth)?;
            let final_residual = lh.sub(&h.scale(lambda), space)?.sup_norm();
            if h.min() <= 0.0 {
                return Err(GibbsError::NoConvergence { iterations: it, residual: final_residual });
            }
            return Ok(NormalizationData {
                lambda,
                h: h.reduce(space),
                residual: final_residual,
                iterations: it,
            });
        }
    }
    log::debug!("power iteration stalled at lambda = {lambda}");
    Err(GibbsError::NoConvergence { iterations: max_iters, residual })
}

/// `φ̄ = φ + log h − log(h∘σ) − log λ`, which satisfies `L_φ̄ 1 = 1`.
/// The result has depth `depth(φ) + 1`.
pub fn normalize_potential(space: &WordSpace, phi: &DepthKFunction, data: &NormalizationData) -> Result<DepthKFunction> {
    if !(data.lambda > 0.0) || data.h.min() <= 0.0 {
        return Err(GibbsError::InvalidArgument("eigendata must be positive".into()));
    }
    let depth = phi.depth() + 1;
    let log_h = data.h.map(f64::ln);
    let log_h_shift = log_h.compose_shift(space)?;
    let total = phi
        .add(&log_h, space)?
        .sub(&log_h_shift, space)?
        .offset(-data.lambda.ln());
    total.embed(space, total.depth().max(depth))
}

/// Eigendata followed by normalization.
pub fn normalize(op: &TransferOperator<'_>, tol: f64, max_iters: usize) -> Result<(DepthKFunction, NormalizationData)> {
    let data = leading_eigendata(op, tol, max_iters)?;
    let phi_bar = normalize_potential(op.space(), op.potential(), &data)?;
    Ok((phi_bar, data))
}
