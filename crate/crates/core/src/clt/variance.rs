use serde::{Deserialize, Serialize};

use super::decomposition::{build_decomposition, center, MartingaleDecomposition, GAP_MARGIN};
use crate::error::{GibbsError, Result};
use crate::transfer::{DepthKFunction, GapEstimate, TransferOperator};
use crate::transport::GibbsSolution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    /// `E(ψ̃²) + 2 Σ_{j=1}^{J} E(ψ̃ · ψ̃∘σ^j)`.
    pub sigma2_green_kubo: f64,
    pub terms: usize,
    /// `2 ‖ψ̃‖_2 ‖ψ̃‖_∞ Λ̂^{J+1} / (1 − Λ̂)`.
    pub green_kubo_tail: f64,
    /// `‖ρ‖_2^2` from the martingale decomposition.
    pub sigma2_rho: f64,
    /// Bound on `|sigma2_rho − sigma2_green_kubo|` from both truncations.
    pub combined_bound: f64,
    /// Running values of the correlation series after each term.
    pub partial_sums: Vec<f64>,
    /// Sample variance of block statistics, when sampled.
    pub sigma2_batch: Option<f64>,
    pub gap_rate: f64,
}

/// Number of Green-Kubo terms whose geometric tail drops below `tol`.
pub fn terms_for_tolerance(gap: &GapEstimate, scale: f64, tol: f64) -> usize {
    let rate = gap.rate;
    if rate <= 0.0 || scale <= 0.0 {
        return 1;
    }
    let mut j = 1usize;
    while 2.0 * scale * rate.powi(j as i32 + 1) / (1.0 - rate) > tol && j < 100_000 {
        j += 1;
    }
    j
}

/// Green-Kubo variance with `terms` correlation terms, cross-checked
/// against `‖ρ‖_2^2` from a decomposition truncated at `decomposition_tol`.
pub fn green_kubo_variance(
    op: &TransferOperator<'_>,
    solution: &GibbsSolution,
    psi: &DepthKFunction,
    gap: &GapEstimate,
    terms: usize,
    decomposition_tol: f64,
) -> Result<(VarianceReport, MartingaleDecomposition)> {
    if terms == 0 {
        return Err(GibbsError::InvalidArgument("Green-Kubo needs at least one term".into()));
    }
    if gap.rate >= 1.0 - GAP_MARGIN {
        return Err(GibbsError::NoGap { rate: gap.rate });
    }
    let space = op.space();
    let mu = &solution.measure;
    let psi_t = center(op, solution, psi)?;
    let second = mu.integrate(space, &psi_t.mul(&psi_t, space)?)?;

    let mut partial_sums = Vec::with_capacity(terms);
    let mut sigma2 = second;
    let mut pushed = psi_t.clone();
    for _ in 0..terms {
        pushed = op.apply(&pushed)?;
        sigma2 += 2.0 * mu.integrate(space, &psi_t.mul(&pushed, space)?)?;
        partial_sums.push(sigma2);
    }
    let l2 = second.max(0.0).sqrt();
    let green_kubo_tail = 2.0 * l2 * psi_t.sup_norm() * gap.rate.powi(terms as i32 + 1) / (1.0 - gap.rate);

    let dec = build_decomposition(op, solution, psi, gap, decomposition_tol)?;
    let sigma2_rho = mu.integrate(space, &dec.rho.mul(&dec.rho, space)?)?;
    // ρ differs from its untruncated limit by at most 2·tail in sup norm
    let drift = 2.0 * dec.tail_bound;
    let combined_bound = green_kubo_tail + 2.0 * dec.rho.sup_norm() * drift + drift * drift + 1e-12;

    Ok((
        VarianceReport {
            sigma2_green_kubo: sigma2,
            terms,
            green_kubo_tail,
            sigma2_rho,
            combined_bound,
            partial_sums,
            sigma2_batch: None,
            gap_rate: gap.rate,
        },
        dec,
    ))
}
