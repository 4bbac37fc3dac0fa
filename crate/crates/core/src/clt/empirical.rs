use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::decomposition::center;
use super::sampler::{block_rng, GibbsSampler};
use crate::error::{GibbsError, Result};
use crate::transfer::{DepthKFunction, TransferOperator};
use crate::transport::GibbsSolution;

/// Fewest blocks accepted by [`empirical_clt`].
pub const MIN_SAMPLES: usize = 1000;

/// Histogram range in units of the reference standard deviation.
const HIST_SPAN: f64 = 4.0;
const HIST_BINS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges; the outer bins also hold the mass beyond them.
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

impl Histogram {
    pub fn new(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0usize; bins];
        for &v in values {
            let b = ((v - lo) / width).floor();
            let b = if b.is_nan() { 0 } else { (b.max(0.0) as usize).min(bins - 1) };
            counts[b] += 1;
        }
        let n = values.len().max(1) as f64;
        Histogram { edges, masses: counts.iter().map(|&c| c as f64 / n).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic Kolmogorov tail probability.
    pub p_value: f64,
    /// Half the largest atom of the sample; no continuous law can come closer.
    pub atom_floor: f64,
}

/// Sample values closer than this (relative to their size) form one atom;
/// block sums of lattice-valued observables differ only by summation order.
const TIE_TOL: f64 = 1e-9;

/// Kolmogorov-Smirnov distance of `samples` from `N(0, variance)`.
pub fn ks_normal(samples: &[f64], variance: f64) -> Result<KsResult> {
    let normal = Normal::new(0.0, variance.sqrt())
        .map_err(|e| GibbsError::InvalidArgument(format!("reference normal: {e}")))?;
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        return Err(GibbsError::InvalidArgument("no samples".into()));
    }
    let nf = n as f64;
    let mut d: f64 = 0.0;
    let mut largest_atom = 0usize;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[j + 1] - xs[i] <= TIE_TOL * xs[i].abs().max(1.0) {
            j += 1;
        }
        let f = normal.cdf(xs[i]);
        d = d.max(f - i as f64 / nf).max((j + 1) as f64 / nf - f);
        largest_atom = largest_atom.max(j + 1 - i);
        i = j + 1;
    }
    Ok(KsResult { statistic: d, p_value: kolmogorov_tail(d, n), atom_floor: largest_atom as f64 / nf / 2.0 })
}

/// `P(D_n > d)` from the Kolmogorov series with the Stephens small-sample correction.
pub fn kolmogorov_tail(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `S_m ψ̃ / √m` on `n_samples` independent Gibbs blocks.
pub fn block_statistics(
    op: &TransferOperator<'_>,
    solution: &GibbsSolution,
    psi: &DepthKFunction,
    block_m: usize,
    n_samples: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if block_m == 0 {
        return Err(GibbsError::InvalidArgument("block length must be positive".into()));
    }
    let space = op.space();
    let psi_t = center(op, solution, psi)?;
    let d = psi_t.depth();
    let table = space.table(d);
    let sampler = GibbsSampler::new(op, solution)?;
    let scale = 1.0 / (block_m as f64).sqrt();
    (0..n_samples)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b as u64 + 1);
            let x = sampler.run(&mut rng, burn_in, block_m + d - 1)?;
            let mut sum = 0.0;
            for j in 0..block_m {
                let idx = table.index_of(&x[j..j + d]).expect("sampled words are admissible");
                sum += psi_t.values()[idx];
            }
            Ok(sum * scale)
        })
        .collect()
}

pub const REFERENCE_LAW: &str = "N(0, reference_variance)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub n_samples: usize,
    pub block_m: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Always `"N(0, reference_variance)"`: density `e^{-t²/(2σ²)} / (σ√(2π))`,
    /// spelled out because the variance-vs-scale convention is easy to misread.
    pub reference_law: String,
    /// Variance of the reference normal law.
    pub reference_variance: f64,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub ks: KsResult,
    pub histogram: Histogram,
}

/// Block statistics compared with `N(0, sigma2)`.
#[allow(clippy::too_many_arguments)]
pub fn empirical_clt(
    op: &TransferOperator<'_>,
    solution: &GibbsSolution,
    psi: &DepthKFunction,
    sigma2: f64,
    block_m: usize,
    n_samples: usize,
    burn_in: usize,
    seed: u64,
    zero_tol: f64,
) -> Result<CltReport> {
    if !(sigma2 > zero_tol) {
        return Err(GibbsError::ZeroVariance { sigma2 });
    }
    if n_samples < MIN_SAMPLES {
        return Err(GibbsError::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {n_samples}")));
    }
    let stats = block_statistics(op, solution, psi, block_m, n_samples, burn_in, seed)?;
    let n = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / n;
    let var = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = sigma2.sqrt();
    Ok(CltReport {
        n_samples,
        block_m,
        burn_in,
        seed,
        reference_law: REFERENCE_LAW.to_string(),
        reference_variance: sigma2,
        sample_mean: mean,
        sample_variance: var,
        ks: ks_normal(&stats, sigma2)?,
        histogram: Histogram::new(&stats, -HIST_SPAN * sd, HIST_SPAN * sd, HIST_BINS),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let normal = Normal::new(0.0, 2.0).unwrap();
        let n = 2000;
        let xs: Vec<f64> = (0..n).map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64)).collect();
        let ks = ks_normal(&xs, 4.0).unwrap();
        assert!((ks.statistic - 0.5 / n as f64).abs() < 1e-9);
        assert!(ks.p_value > 0.99);
    }

    #[test]
    fn lattice_atoms_bound_the_distance() {
        let xs = vec![0.0; 1000];
        let ks = ks_normal(&xs, 1.0).unwrap();
        assert!((ks.statistic - 0.5).abs() < 1e-12);
        assert_eq!(ks.atom_floor, 0.5);
        assert!(ks.p_value < 1e-10);
    }

    #[test]
    fn near_ties_form_one_atom() {
        let xs: Vec<f64> = (0..1000).map(|i| 0.1 + 0.2 + (i % 3) as f64 * 1e-17 - 0.3).collect();
        let ks = ks_normal(&xs, 1.0).unwrap();
        assert_eq!(ks.atom_floor, 0.5);
    }

    #[test]
    fn histogram_mass() {
        let xs = [-10.0, -0.5, 0.1, 0.2, 7.0];
        let h = Histogram::new(&xs, -1.0, 1.0, 4);
        assert_eq!(h.masses, vec![0.2, 0.2, 0.4, 0.2]);
        assert!((h.masses.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
