use serde::{Deserialize, Serialize};

use super::function::DepthKFunction;
use super::lipschitz::{lipschitz_of_exp, lipschitz_seminorm};
use super::ruelle::TransferOperator;
use crate::config_space::truncated_distance;
use crate::error::{GibbsError, Result};

/// Relative slack for round-off when comparing both sides of the bound.
const ROUNDOFF: f64 = 1e-12;

/// Outcome of checking the Lasota-Yorke regularity bound
/// `|L^m ψ(x) − L^m ψ(y)| ≤ (2^{-m} Lip(ψ) + (1 − 2^{-m}) Lip(e^φ) ‖ψ‖_∞) d_X(x, y)`
/// over word pairs whose first letters share a partition block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LasotaYorkeReport {
    pub steps: usize,
    pub depth: usize,
    pub pairs_checked: usize,
    pub violations: Vec<(usize, usize)>,
    /// Largest `lhs / rhs` seen; at most one when the bound holds.
    pub worst_ratio: f64,
}

/// Checks the bound for `L^m ψ` on all same-block pairs of `depth`-words.
///
/// Distances are truncated at `depth`. The Lipschitz constants are computed
/// with the same truncated distances, so the check is exactly the inductive
/// statement on the grid.
pub fn lasota_yorke_check(
    op: &TransferOperator<'_>,
    psi: &DepthKFunction,
    m: usize,
    depth: usize,
) -> Result<LasotaYorkeReport> {
    let space = op.space();
    space.check_depth(depth)?;
    let iterated = op.apply_n(psi, m)?.reduce(space);
    if iterated.depth() > depth {
        return Err(GibbsError::DepthMismatch { required: iterated.depth(), available: depth });
    }
    let values = iterated.embed(space, depth)?;
    let vals = values.values();
    let half_m = 0.5f64.powi(m as i32);
    let slope = half_m * lipschitz_seminorm(space, psi)
        + (1.0 - half_m) * lipschitz_of_exp(space, op.potential()) * psi.sup_norm();

    let table = space.table(depth);
    let sys = space.system();
    let grid = space.grid();
    let mut pairs_checked = 0;
    let mut violations = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for i in 0..table.len() {
        let bi = sys.block_of(table.first_letter(i));
        for j in (i + 1)..table.len() {
            if sys.block_of(table.first_letter(j)) != bi {
                continue;
            }
            pairs_checked += 1;
            let lhs = (vals[i] - vals[j]).abs();
            let rhs = slope * truncated_distance(grid, table.word(i), table.word(j));
            if lhs > rhs * (1.0 + ROUNDOFF) + ROUNDOFF * vals[i].abs().max(vals[j].abs()) {
                violations.push((i, j));
            }
            if rhs > 0.0 {
                worst_ratio = worst_ratio.max(lhs / rhs);
            } else if lhs > 0.0 {
                worst_ratio = f64::INFINITY;
            }
        }
    }
    Ok(LasotaYorkeReport { steps: m, depth, pairs_checked, violations, worst_ratio })
}
