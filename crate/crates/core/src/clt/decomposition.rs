use serde::{Deserialize, Serialize};

use crate::error::{GibbsError, Result};
use crate::transfer::{DepthKFunction, GapEstimate, TransferOperator};
use crate::transport::GibbsSolution;

/// Rates this close to one are treated as having no spectral gap.
pub const GAP_MARGIN: f64 = 1e-6;

/// Hard cap on series terms.
pub const MAX_SERIES_TERMS: usize = 100_000;

/// `ψ − ∫ψ dμ`.
pub fn center(op: &TransferOperator<'_>, solution: &GibbsSolution, psi: &DepthKFunction) -> Result<DepthKFunction> {
    let mean = solution.measure.integrate(op.space(), psi)?;
    Ok(psi.offset(-mean))
}

/// `E(ψ̃ | σ^{-m} B) = (L^m ψ̃) ∘ σ^m`.
pub fn conditional_expectation(op: &TransferOperator<'_>, psi_tilde: &DepthKFunction, m: usize) -> Result<DepthKFunction> {
    if m == 0 {
        return Ok(psi_tilde.clone());
    }
    let space = op.space();
    let pushed = op.apply_n(psi_tilde, m)?.reduce(space);
    let required = pushed.depth() + m;
    if required > space.max_depth() {
        return Err(GibbsError::DepthExhausted { lag: m, required, available: space.max_depth() });
    }
    pushed.compose_shift_n(space, m)
}

/// Whether `f` ignores its first `m` coordinates.
pub fn depends_only_after(op: &TransferOperator<'_>, f: &DepthKFunction, m: usize) -> bool {
    let space = op.space();
    if m >= f.depth() {
        return f.max() == f.min();
    }
    let tail = space.window_map(f.depth(), m, f.depth() - m);
    let mut seen = vec![None; space.table(f.depth() - m).len()];
    for (i, &t) in tail.iter().enumerate() {
        let v = f.values()[i];
        match seen[t] {
            None => seen[t] = Some(v),
            Some(prev) if prev != v => return false,
            _ => {}
        }
    }
    true
}

fn check_gap(gap: &GapEstimate) -> Result<f64> {
    if gap.rate >= 1.0 - GAP_MARGIN || !gap.rate.is_finite() {
        return Err(GibbsError::NoGap { rate: gap.rate });
    }
    Ok(gap.rate)
}

/// `ψ̃ = ρ + ζ − ζ∘σ` with `L ρ ≈ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleDecomposition {
    pub psi_tilde: DepthKFunction,
    /// `−Σ_{m=1}^{M} L^m ψ̃`.
    pub zeta: DepthKFunction,
    /// `Σ_{m=0}^{M} (L^m ψ̃ − (L^{m+1} ψ̃)∘σ)`.
    pub rho: DepthKFunction,
    pub series_terms: usize,
    /// `osc(L^M ψ̃) Λ̂ / (1 − Λ̂)`.
    pub tail_bound: f64,
    pub gap_rate: f64,
    /// `‖L ρ‖_∞`.
    pub martingale_residual: f64,
    /// `‖ρ − (ψ̃ − ζ + ζ∘σ)‖_∞`.
    pub identity_residual: f64,
    /// `∫ ρ dμ`.
    pub mean_rho: f64,
}

/// Truncates the cohomological series once its geometric tail is below `tol`.
pub fn build_decomposition(
    op: &TransferOperator<'_>,
    solution: &GibbsSolution,
    psi: &DepthKFunction,
    gap: &GapEstimate,
    tol: f64,
) -> Result<MartingaleDecomposition> {
    let rate = check_gap(gap)?;
    let space = op.space();
    let psi_tilde = center(op, solution, psi)?;

    // powers[m] = L^m ψ̃
    let mut powers = vec![psi_tilde.clone()];
    // Oscillation rather than sup norm: centering against an approximate
    // measure leaves a constant that L preserves, and constants cancel in
    // both ρ and ζ − ζ∘σ.
    let tail = |f: &DepthKFunction| (f.max() - f.min()) * rate / (1.0 - rate);
    while tail(powers.last().expect("nonempty")) > tol {
        if powers.len() > MAX_SERIES_TERMS {
            return Err(GibbsError::NoConvergence {
                iterations: MAX_SERIES_TERMS,
                residual: tail(powers.last().expect("nonempty")),
            });
        }
        let next = op.apply(powers.last().expect("nonempty"))?;
        powers.push(next);
    }
    let series_terms = powers.len() - 1;
    let tail_bound = tail(&powers[series_terms]);
    let next = op.apply(&powers[series_terms])?;

    let mut zeta = DepthKFunction::zero(space);
    for p in &powers[1..] {
        zeta = zeta.sub(p, space)?;
    }
    let zeta = zeta.reduce(space);

    let mut rho = DepthKFunction::zero(space);
    for m in 0..=series_terms {
        let ahead = if m < series_terms { &powers[m + 1] } else { &next };
        rho = rho.add(&powers[m], space)?.sub(&ahead.compose_shift(space)?, space)?;
    }
    let rho = rho.reduce(space);

    let assembled = psi_tilde.sub(&zeta, space)?.add(&zeta.compose_shift(space)?, space)?;
    let identity_residual = rho.sub(&assembled, space)?.sup_norm();
    let martingale_residual = op.apply(&rho)?.sup_norm();
    let mean_rho = solution.measure.integrate(space, &rho)?;

    Ok(MartingaleDecomposition {
        psi_tilde,
        zeta,
        rho,
        series_terms,
        tail_bound,
        gap_rate: rate,
        martingale_residual,
        identity_residual,
        mean_rho,
    })
}

/// Outcome of the zero-variance test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CoboundaryVerdict {
    /// `ψ̃ = u − u∘σ` up to `residual`.
    Coboundary { u: DepthKFunction, residual: f64, sigma2_rho: f64 },
    NotCoboundary { sigma2: f64 },
}

impl CoboundaryVerdict {
    pub fn is_coboundary(&self) -> bool {
        matches!(self, CoboundaryVerdict::Coboundary { .. })
    }
}

/// Decides whether `ψ̃` is a coboundary from `‖ρ‖_2^2 <= tol`; in that case the
/// transfer function is `u = ζ`.
pub fn coboundary_test(
    op: &TransferOperator<'_>,
    solution: &GibbsSolution,
    psi: &DepthKFunction,
    gap: &GapEstimate,
    tol: f64,
) -> Result<CoboundaryVerdict> {
    let space = op.space();
    let dec = build_decomposition(op, solution, psi, gap, tol * 1e-2)?;
    let sigma2_rho = solution.measure.integrate(space, &dec.rho.mul(&dec.rho, space)?)?;
    if sigma2_rho > tol {
        return Ok(CoboundaryVerdict::NotCoboundary { sigma2: sigma2_rho });
    }
    let u = dec.zeta;
    let rebuilt = u.sub(&u.compose_shift(space)?, space)?;
    let residual = dec.psi_tilde.sub(&rebuilt, space)?.sup_norm();
    Ok(CoboundaryVerdict::Coboundary { u, residual, sigma2_rho })
}
