use serde::{Deserialize, Serialize};

use super::function::DepthKFunction;
use super::ruelle::TransferOperator;
use crate::error::{GibbsError, Result};
use crate::transport::WordMeasure;

/// Empirical rate `Λ̂` at which `L_φ̄` contracts zero-mean functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub rate: f64,
    pub steps: usize,
    /// `(‖L^m ψ̃‖_∞ / ‖ψ̃‖_∞)^{1/m}` per probe; `None` for probes that are
    /// constant and thus vanish after centering.
    pub per_probe: Vec<Option<f64>>,
}

/// Estimates `Λ = ‖L_φ̄|_V‖_op` from the `steps`-step decay of centered probes.
pub fn spectral_gap_estimate(
    op: &TransferOperator<'_>,
    mu: &WordMeasure,
    probes: &[DepthKFunction],
    steps: usize,
) -> Result<GapEstimate> {
    if probes.is_empty() {
        return Err(GibbsError::InvalidProbe("probe set is empty".into()));
    }
    if steps == 0 {
        return Err(GibbsError::InvalidArgument("steps must be positive".into()));
    }
    let space = op.space();
    let mut per_probe = Vec::with_capacity(probes.len());
    for probe in probes {
        let mean = mu.integrate(space, probe)?;
        let centered = probe.offset(-mean);
        let norm = centered.sup_norm();
        if norm <= 1e-14 * probe.sup_norm().max(1.0) {
            per_probe.push(None);
            continue;
        }
        let decayed = op.apply_n(&centered, steps)?;
        per_probe.push(Some((decayed.sup_norm() / norm).powf(1.0 / steps as f64)));
    }
    let rate = per_probe
        .iter()
        .flatten()
        .copied()
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
        .ok_or_else(|| GibbsError::InvalidProbe("every probe is constant".into()))?;
    Ok(GapEstimate { rate, steps, per_probe })
}

/// Centered indicators of the 1-cylinders, the default probe set.
pub fn default_probes(space: &crate::config_space::WordSpace) -> Vec<DepthKFunction> {
    (0..space.table(1).len() as u32)
        .map(|a| DepthKFunction::indicator(space, &[a]).expect("depth 1 exists"))
        .collect()
}
