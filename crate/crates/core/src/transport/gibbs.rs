use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::WordMeasure;
use super::solver::TransportSolver;
use super::wasserstein::{diagonal_mass, wasserstein_with_cost, GroundCost, GroundMetric};
use crate::config_space::{choose_delta, truncated_distance, MetricConfig};
use crate::error::{GibbsError, Result};
use crate::transfer::{lipschitz_of_exp, lipschitz_seminorm, NormalizationData, TransferOperator};

/// `‖L 1 − 1‖_∞` above which a potential is rejected as not normalized.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Distances below this are treated as zero when forming contraction ratios.
const RATIO_FLOOR: f64 = 1e-14;

/// `L*μ` on `k`-word cylinders: `(L*μ)[b] = ν(b_1) e^{φ(b)} μ[b_2 … b_k]`.
///
/// Exact whenever `depth(φ) <= k`. The total mass is `∫ L_φ 1 dμ` and is not
/// renormalized here.
pub fn dual_apply(op: &TransferOperator<'_>, mu: &WordMeasure) -> Result<WordMeasure> {
    let space = op.space();
    let k = mu.depth();
    let weights = op.weights(k)?;
    let tail = mu.marginal(space, k - 1)?;
    let table = space.table(k);
    let tm = tail.masses();
    let masses: Vec<f64> = if table.len() >= 4096 {
        (0..table.len()).into_par_iter().map(|i| weights[i] * tm[table.tail_index(i)]).collect()
    } else {
        (0..table.len()).map(|i| weights[i] * tm[table.tail_index(i)]).collect()
    };
    Ok(WordMeasure::from_raw(k, masses))
}

/// `(L*)^m μ`, renormalized after every step.
pub fn dual_apply_n(op: &TransferOperator<'_>, mu: &WordMeasure, m: usize) -> Result<WordMeasure> {
    let mut cur = mu.clone();
    for _ in 0..m {
        cur = dual_apply(op, &cur)?.normalized();
    }
    Ok(cur)
}

/// Empirical check of the Dirac contraction `W((L*)^m δ_x, (L*)^m δ_y) <= α W(δ_x, δ_y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionCertificate {
    /// `max{1 − e^{−Lip(φ)}/2, 3/4}`.
    pub alpha: f64,
    pub lip_phi: f64,
    pub metric: MetricConfig,
    pub m0: usize,
    pub m1: usize,
    pub steps: usize,
    pub pairs_tested: usize,
    /// Ratio per tested pair with nonzero initial distance.
    pub measured_ratios: Vec<f64>,
    /// Largest measured ratio; `None` when no pair had positive distance.
    pub beta: Option<f64>,
    pub violations: Vec<ContractionViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionViolation {
    pub x: usize,
    pub y: usize,
    pub ratio: f64,
}

/// `max{1 − e^{−lip}/2, 3/4}`.
pub fn contraction_alpha(lip_phi: f64) -> f64 {
    (1.0 - (-lip_phi).exp() / 2.0).max(0.75)
}

/// The bounded-metric configuration used for a normalized potential.
pub fn metric_for(op: &TransferOperator<'_>) -> Result<MetricConfig> {
    // δ is chosen as if Lip(e^φ) >= 1, which only shrinks it
    choose_delta(lipschitz_of_exp(op.space(), op.potential()).max(1.0))
}

/// Measures the `m`-step Dirac contraction ratio for every pair of word
/// indices at depth `depth`. Violations are data, not errors.
pub fn certify_contraction(
    op: &TransferOperator<'_>,
    cfg: &MetricConfig,
    depth: usize,
    pairs: &[(usize, usize)],
    m: usize,
    solver: &dyn TransportSolver,
) -> Result<ContractionCertificate> {
    let m1 = cfg.m1();
    if m < m1 {
        return Err(GibbsError::InvalidArgument(format!("contraction needs m >= m1 = {m1}, got {m}")));
    }
    let space = op.space();
    let lip_phi = lipschitz_seminorm(space, op.potential());
    let alpha = contraction_alpha(lip_phi);
    let metric = GroundMetric::Bounded(*cfg);
    let cost = GroundCost::new(space, depth, metric)?;
    let n = space.table(depth).len();
    let pushed: Vec<WordMeasure> = (0..n)
        .into_par_iter()
        .map(|i| dual_apply_n(op, &WordMeasure::dirac(space, depth, i)?, m))
        .collect::<Result<_>>()?;

    let results: Vec<Option<(usize, usize, f64)>> = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<Option<(usize, usize, f64)>> {
            if x >= n || y >= n {
                return Err(GibbsError::InvalidArgument(format!("pair ({x}, {y}) out of range")));
            }
            let d = cost.get(x, y);
            if d <= RATIO_FLOOR {
                return Ok(None);
            }
            let w = wasserstein_with_cost(&pushed[x], &pushed[y], &cost, solver)?;
            Ok(Some((x, y, w.value / d)))
        })
        .collect::<Result<_>>()?;

    let measured: Vec<(usize, usize, f64)> = results.into_iter().flatten().collect();
    let beta = measured.iter().map(|r| r.2).fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    let violations = measured
        .iter()
        .filter(|r| r.2 > alpha)
        .map(|&(x, y, ratio)| ContractionViolation { x, y, ratio })
        .collect();
    Ok(ContractionCertificate {
        alpha,
        lip_phi,
        metric: *cfg,
        m0: cfg.m0(),
        m1,
        steps: m,
        pairs_tested: pairs.len(),
        measured_ratios: measured.iter().map(|r| r.2).collect(),
        beta,
        violations,
    })
}

/// All unordered pairs `i < j` of words at `depth`, optionally thinned to at
/// most `limit` pairs by a fixed stride.
pub fn dirac_pairs(n: usize, limit: Option<usize>) -> Vec<(usize, usize)> {
    let all: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    match limit {
        Some(l) if l > 0 && all.len() > l => {
            let stride = all.len().div_ceil(l);
            all.into_iter().step_by(stride).collect()
        }
        _ => all,
    }
}

/// Smallest diagonal mass over the given pairs, for iterated Diracs
/// `(L*)^m δ_x`, `(L*)^m δ_y` and the depth-`k` diagonal.
pub fn min_diagonal_mass(
    op: &TransferOperator<'_>,
    depth: usize,
    pairs: &[(usize, usize)],
    m: usize,
    k: usize,
    solver: &dyn TransportSolver,
) -> Result<f64> {
    let space = op.space();
    pairs
        .par_iter()
        .map(|&(x, y)| {
            let a = dual_apply_n(op, &WordMeasure::dirac(space, depth, x)?, m)?;
            let b = dual_apply_n(op, &WordMeasure::dirac(space, depth, y)?, m)?;
            diagonal_mass(space, &a, &b, k, solver)
        })
        .try_reduce(|| 1.0, |a, b| Ok(a.min(b)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsOptions {
    pub tol: f64,
    pub max_outer: usize,
    /// Skip the Dirac contraction scan.
    pub skip_certificate: bool,
    /// Upper bound on Dirac pairs scanned for the certificate.
    pub certificate_pairs: Option<usize>,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        GibbsOptions { tol: 1e-10, max_outer: 500, skip_certificate: false, certificate_pairs: Some(4096) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsSolution {
    pub measure: WordMeasure,
    pub normalization: NormalizationData,
    pub certificate: Option<ContractionCertificate>,
    pub iterations: usize,
    /// Last `W_{D_X}` step between consecutive iterates.
    pub final_gap: f64,
    /// `W_{D_X}(L*μ, μ)` at the returned measure.
    pub residual: f64,
    pub shift_residual: f64,
    pub step_sizes: Vec<f64>,
    pub metric: MetricConfig,
}

/// Iterates `μ ← L*μ` from `mu0` until both the step and the fixed-point
/// residual are at most `tol` in `W_{D_X}`.
pub fn solve_gibbs(
    op: &TransferOperator<'_>,
    normalization: NormalizationData,
    mu0: &WordMeasure,
    opts: &GibbsOptions,
    solver: &dyn TransportSolver,
) -> Result<GibbsSolution> {
    if !(opts.tol > 0.0) {
        return Err(GibbsError::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let deviation = op.normalization_defect()?;
    if deviation > NORMALIZATION_TOL {
        return Err(GibbsError::NotNormalized { deviation });
    }
    let space = op.space();
    let depth = mu0.depth();
    let cfg = metric_for(op)?;
    let cost = GroundCost::new(space, depth, GroundMetric::Bounded(cfg))?;

    let mut mu = mu0.clone().normalized();
    let mut next = dual_apply(op, &mu)?.normalized();
    let mut step = wasserstein_with_cost(&next, &mu, &cost, solver)?.value;
    let mut step_sizes = vec![step];
    let mut iterations = 1;
    loop {
        let after = dual_apply(op, &next)?.normalized();
        let residual = wasserstein_with_cost(&after, &next, &cost, solver)?.value;
        if step <= opts.tol && residual <= opts.tol {
            mu = next;
            let shift_residual = mu.shift_invariance_residual(space)?;
            let certificate = if opts.skip_certificate {
                None
            } else {
                let pairs = dirac_pairs(space.table(depth).len(), opts.certificate_pairs);
                Some(certify_contraction(op, &cfg, depth, &pairs, cfg.m1(), solver)?)
            };
            return Ok(GibbsSolution {
                measure: mu,
                normalization,
                certificate,
                iterations,
                final_gap: step,
                residual,
                shift_residual,
                step_sizes,
                metric: cfg,
            });
        }
        if iterations >= opts.max_outer {
            return Err(GibbsError::NoConvergence { iterations, residual });
        }
        step = residual;
        step_sizes.push(step);
        next = after;
        iterations += 1;
    }
}

/// Truncated `d_X` between two words of `depth`.
pub fn word_distance(op: &TransferOperator<'_>, depth: usize, x: usize, y: usize) -> f64 {
    let table = op.space().table(depth);
    truncated_distance(op.space().grid(), table.word(x), table.word(y))
}
