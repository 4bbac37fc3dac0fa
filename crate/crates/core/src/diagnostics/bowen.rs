use serde::{Deserialize, Serialize};

use crate::config_space::{mixing_exponent, AdmissibilitySystem, WordSpace};
use crate::error::{GibbsError, Result};
use crate::transfer::{ergodic_sum, lipschitz_seminorm, TransferOperator};
use crate::transport::GibbsSolution;

/// Largest transition-matrix power tried when measuring the mixing exponent.
const MIXING_SEARCH: usize = 64;

/// How the point `x̃ ∈ [w]` used in `S_m φ(x̃)` is picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Representative {
    /// Lexicographically least infinite admissible extension.
    #[default]
    Least,
    /// Lexicographically greatest infinite admissible extension.
    Greatest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderRatio {
    pub m: usize,
    pub word: Vec<u32>,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthExtremes {
    pub m: usize,
    pub lower: f64,
    pub upper: f64,
    /// `max(upper, 1 / lower)`.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowenReport {
    pub max_depth: usize,
    pub representative: Representative,
    pub ratios: Vec<CylinderRatio>,
    pub per_depth: Vec<DepthExtremes>,
    pub c_lower: f64,
    pub c_upper: f64,
    /// Smallest `C` with every ratio in `[C⁻¹, C]`.
    pub c_empirical: f64,
    /// `max_m C_m / min_m C_m` over the scanned depths.
    pub c_spread: f64,
    /// Infimum of the one-step weight `ν(w_1) e^{φ(w)}`.
    pub i_inf: f64,
    pub mixing_exponent: Option<usize>,
    pub lip_phi: f64,
    /// `e^{Lip(φ)} max(1, I_inf^{-p})`; `None` when `p` is unknown.
    pub theory_c: Option<f64>,
    /// Cylinders with no infinite admissible extension, left out of the scan.
    pub skipped_cylinders: usize,
}

/// Extends `word` to `len` letters along the extreme admissible path that
/// stays inside forward-viable letters.
pub fn canonical_extension(
    sys: &AdmissibilitySystem,
    viable: &[bool],
    word: &[u32],
    len: usize,
    rep: Representative,
) -> Option<Vec<u32>> {
    let last = *word.last()? as usize;
    if !viable[last] {
        return None;
    }
    let mut out = word.to_vec();
    while out.len() < len {
        let a = *out.last().expect("nonempty") as usize;
        let succ = sys.successors(a).into_iter().filter(|&b| viable[b]);
        let next = match rep {
            Representative::Least => succ.min(),
            Representative::Greatest => succ.max(),
        }?;
        out.push(next as u32);
    }
    Some(out)
}

/// Scans `μ(C_m) / (e^{S_m φ(x̃)} ν^m(C_m))` over all admissible `m`-word
/// cylinders, `1 <= m <= max_depth`.
///
/// The factor `ν^m(C_m) = Π ν(w_i)` appears because the transfer operator
/// integrates against the a priori measure; with it, product measures give
/// ratio exactly one.
pub fn bowen_scan(
    solution: &GibbsSolution,
    op: &TransferOperator<'_>,
    max_depth: usize,
    rep: Representative,
) -> Result<BowenReport> {
    let space: &WordSpace = op.space();
    let phi = op.potential();
    let mu = &solution.measure;
    if max_depth == 0 || max_depth >= mu.depth() {
        return Err(GibbsError::DepthMismatch { required: max_depth + 1, available: mu.depth() });
    }
    let sys = space.system();
    let grid = space.grid();
    let viable = sys.forward_viable();
    let extra = phi.depth() - 1;

    let mut ratios = Vec::new();
    let mut per_depth = Vec::new();
    let mut skipped = 0;
    for m in 1..=max_depth {
        let marginal = mu.marginal(space, m)?;
        let table = space.table(m);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (i, w) in table.words().enumerate() {
            let Some(x) = canonical_extension(sys, &viable, w, m + extra, rep) else {
                skipped += 1;
                continue;
            };
            let sum = ergodic_sum(space, phi, &x, m)?;
            let prior: f64 = w.iter().map(|&a| grid.nu(a as usize)).product();
            let ratio = marginal.masses()[i] / (sum.exp() * prior);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            ratios.push(CylinderRatio { m, word: w.to_vec(), ratio });
        }
        if hi > 0.0 {
            per_depth.push(DepthExtremes { m, lower: lo, upper: hi, constant: hi.max(1.0 / lo) });
        }
    }

    let c_lower = per_depth.iter().map(|d| d.lower).fold(f64::INFINITY, f64::min);
    let c_upper = per_depth.iter().map(|d| d.upper).fold(0.0, f64::max);
    let c_max = per_depth.iter().map(|d| d.constant).fold(0.0, f64::max);
    let c_min = per_depth.iter().map(|d| d.constant).fold(f64::INFINITY, f64::min);

    let weight_depth = phi.depth().max(2);
    let i_inf = op.weights(weight_depth)?.iter().copied().fold(f64::INFINITY, f64::min);
    let p = mixing_exponent(sys, MIXING_SEARCH);
    let lip_phi = lipschitz_seminorm(space, phi);
    let theory_c = p.map(|p| lip_phi.exp() * 1.0f64.max(i_inf.powi(-(p as i32))));

    Ok(BowenReport {
        max_depth,
        representative: rep,
        ratios,
        per_depth,
        c_lower,
        c_upper,
        c_empirical: c_upper.max(1.0 / c_lower),
        c_spread: c_max / c_min,
        i_inf,
        mixing_exponent: p,
        lip_phi,
        theory_c,
        skipped_cylinders: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn least_extension_avoids_forbidden_pairs() {
        let (_, sys) = fixtures::golden_mean_system();
        let viable = sys.forward_viable();
        assert_eq!(
            canonical_extension(&sys, &viable, &[1], 4, Representative::Least).unwrap(),
            vec![1, 0, 0, 0]
        );
        assert_eq!(
            canonical_extension(&sys, &viable, &[0], 4, Representative::Greatest).unwrap(),
            vec![0, 1, 0, 1]
        );
    }
}
