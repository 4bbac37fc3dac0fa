use serde::{Deserialize, Serialize};

use crate::error::{GibbsError, Result};
use crate::transfer::{default_probes, spectral_gap_estimate, DepthKFunction, GapEstimate, TransferOperator};
use crate::transport::GibbsSolution;

/// Correlations at or below this magnitude are treated as numerically zero.
pub const CORRELATION_FLOOR: f64 = 1e-14;

/// Multiplicative slack allowed on the envelope `C Λ̂^m`.
pub const ENVELOPE_SLACK: f64 = 1.1;

/// Probe decay horizon used for `Λ̂` in [`decay_fit`].
pub const DEFAULT_GAP_STEPS: usize = 6;

/// `Cor(m)` evaluated two ways.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationValue {
    pub lag: usize,
    /// `∫ φ · L^m ψ̃ dμ`.
    pub operator: f64,
    /// `∫ (φ∘σ^m) ψ̃ dμ`; `None` once the lag outruns the measure depth.
    pub direct: Option<f64>,
}

/// `∫ (φ∘σ^m) ψ̃ dμ` by expanding `φ∘σ^m` on words.
pub fn correlation_direct(
    solution: &GibbsSolution,
    op: &TransferOperator<'_>,
    phi_obs: &DepthKFunction,
    psi_obs: &DepthKFunction,
    lag: usize,
) -> Result<f64> {
    let space = op.space();
    let mu = &solution.measure;
    let required = (phi_obs.depth() + lag).max(psi_obs.depth());
    if required > mu.depth() {
        return Err(GibbsError::DepthExhausted { lag, required, available: mu.depth() });
    }
    let psi_t = psi_obs.offset(-mu.integrate(space, psi_obs)?);
    let shifted = phi_obs.compose_shift_n(space, lag)?;
    mu.integrate(space, &shifted.mul(&psi_t, space)?)
}

/// `∫ φ · L^m ψ̃ dμ`, valid at every lag.
pub fn correlation_operator(
    solution: &GibbsSolution,
    op: &TransferOperator<'_>,
    phi_obs: &DepthKFunction,
    psi_obs: &DepthKFunction,
    lag: usize,
) -> Result<f64> {
    let space = op.space();
    let mu = &solution.measure;
    let psi_t = psi_obs.offset(-mu.integrate(space, psi_obs)?);
    let pushed = op.apply_n(&psi_t, lag)?;
    mu.integrate(space, &phi_obs.mul(&pushed, space)?)
}

/// Both forms of the lag-`m` correlation of `φ` after `ψ`.
pub fn correlation(
    solution: &GibbsSolution,
    op: &TransferOperator<'_>,
    phi_obs: &DepthKFunction,
    psi_obs: &DepthKFunction,
    lag: usize,
) -> Result<CorrelationValue> {
    let operator = correlation_operator(solution, op, phi_obs, psi_obs, lag)?;
    let direct = match correlation_direct(solution, op, phi_obs, psi_obs, lag) {
        Ok(v) => Some(v),
        Err(GibbsError::DepthExhausted { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CorrelationValue { lag, operator, direct })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub m: usize,
    pub cor: f64,
    pub direct: Option<f64>,
    /// `C_{φ,ψ} Λ̂^m`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCurve {
    pub points: Vec<CorrelationPoint>,
    /// Least-squares slope of `log|Cor(m)|` against `m`.
    pub slope: f64,
    pub intercept: f64,
    pub lambda_fit: f64,
    pub c_fit: f64,
    /// Lags whose correlation cleared [`CORRELATION_FLOOR`] and entered the fit.
    pub fitted_lags: Vec<usize>,
    /// `‖φ‖_1 ‖ψ̃‖_∞`.
    pub c_phi_psi: f64,
    pub gap: GapEstimate,
    /// Lags where `|Cor(m)|` exceeds [`ENVELOPE_SLACK`] times the bound.
    pub envelope_violations: Vec<usize>,
}

/// Fits `|Cor(m)| ≈ C_fit Λ_fit^m` over `m = 0..=max_lag` and checks the
/// envelope `C_{φ,ψ} Λ̂^m`.
pub fn decay_fit(
    solution: &GibbsSolution,
    op: &TransferOperator<'_>,
    phi_obs: &DepthKFunction,
    psi_obs: &DepthKFunction,
    max_lag: usize,
) -> Result<CorrelationCurve> {
    let space = op.space();
    let mu = &solution.measure;
    let mut probes = default_probes(space);
    probes.push(psi_obs.clone());
    let gap = spectral_gap_estimate(op, mu, &probes, DEFAULT_GAP_STEPS)?;

    let psi_t = psi_obs.offset(-mu.integrate(space, psi_obs)?);
    let c_phi_psi = mu.lp_norm(space, phi_obs, 1.0)? * psi_t.sup_norm();

    let mut points = Vec::with_capacity(max_lag + 1);
    for m in 0..=max_lag {
        let v = correlation(solution, op, phi_obs, psi_obs, m)?;
        points.push(CorrelationPoint { m, cor: v.operator, direct: v.direct, bound: c_phi_psi * gap.rate.powi(m as i32) });
    }

    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.cor.abs() > CORRELATION_FLOOR)
        .map(|p| (p.m as f64, p.cor.abs().ln()))
        .collect();
    if usable.len() < 3 {
        return Err(GibbsError::InsufficientDecayData(format!(
            "{} of {} correlations above the floor {CORRELATION_FLOOR:e}",
            usable.len(),
            points.len()
        )));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let lambda_fit = slope.exp();
    if lambda_fit >= 1.0 - 1e-9 {
        return Err(GibbsError::InsufficientDecayData(format!(
            "correlations do not decay (fitted rate {lambda_fit})"
        )));
    }
    let envelope_violations = points
        .iter()
        .filter(|p| p.cor.abs() > ENVELOPE_SLACK * p.bound)
        .map(|p| p.m)
        .collect();
    Ok(CorrelationCurve {
        fitted_lags: points.iter().filter(|p| p.cor.abs() > CORRELATION_FLOOR).map(|p| p.m).collect(),
        points,
        slope,
        intercept,
        lambda_fit,
        c_fit: intercept.exp(),
        c_phi_psi,
        gap,
        envelope_violations,
    })
}
