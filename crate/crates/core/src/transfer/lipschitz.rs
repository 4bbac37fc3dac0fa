use rayon::prelude::*;

use super::function::DepthKFunction;
use crate::config_space::{truncated_distance, WordSpace};

/// Certified upper bound on `Lip(ψ)` with respect to `d_X`.
///
/// Two sequences in the cylinders `[w]`, `[w']` are at least the truncated
/// distance of the words apart, so the ratio over word pairs bounds the
/// seminorm from above.
pub fn lipschitz_seminorm(space: &WordSpace, psi: &DepthKFunction) -> f64 {
    let psi = psi.reduce(space);
    let table = space.table(psi.depth());
    let grid = space.grid();
    let vals = psi.values();
    let n = table.len();
    let row = |i: usize| -> f64 {
        let wi = table.word(i);
        ((i + 1)..n)
            .map(|j| {
                let dv = (vals[i] - vals[j]).abs();
                if dv == 0.0 {
                    return 0.0;
                }
                dv / truncated_distance(grid, wi, table.word(j))
            })
            .fold(0.0, f64::max)
    };
    if n > 512 {
        (0..n).into_par_iter().map(row).reduce(|| 0.0, f64::max)
    } else {
        (0..n).map(row).fold(0.0, f64::max)
    }
}

/// `Lip(e^φ)`.
pub fn lipschitz_of_exp(space: &WordSpace, phi: &DepthKFunction) -> f64 {
    lipschitz_seminorm(space, &phi.map(f64::exp))
}

/// Bound `Lip(ψ) · 2^{-k}` on the error of replacing a Lipschitz function by
/// its depth-`k` locally constant projection.
pub fn projection_error(lip: f64, k: usize) -> f64 {
    lip * 0.5f64.powi(k as i32)
}
