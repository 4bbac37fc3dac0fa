use rayon::prelude::*;

use super::function::DepthKFunction;
use crate::config_space::WordSpace;
use crate::error::{GibbsError, Result};

/// Word count above which operator applications are split across threads.
const PAR_THRESHOLD: usize = 4096;

/// The Ruelle operator `L_φ ψ(x) = ∫_{s(x_1)} e^{φ(ax)} ψ(ax) dν(a)` for a
/// locally constant potential.
///
/// The one-step weights `ν(a) e^{φ(a w)}` are tabulated once for every depth
/// the space supports.
#[derive(Debug, Clone)]
pub struct TransferOperator<'s> {
    space: &'s WordSpace,
    phi: DepthKFunction,
    /// `weights[d - 1][i] = ν(w_1) e^{φ(w)}` for word `i` of depth `d`,
    /// populated for `d >= max(depth(φ), 2)`.
    weights: Vec<Vec<f64>>,
}

impl<'s> TransferOperator<'s> {
    pub fn new(space: &'s WordSpace, phi: DepthKFunction) -> Result<Self> {
        let start = phi.depth().max(2);
        if start > space.max_depth() {
            return Err(GibbsError::DepthMismatch { required: start, available: space.max_depth() });
        }
        let grid = space.grid();
        let mut weights = vec![Vec::new(); space.max_depth()];
        for d in start..=space.max_depth() {
            let phi_d = phi.embed(space, d)?;
            let table = space.table(d);
            weights[d - 1] = (0..table.len())
                .map(|i| grid.nu(table.first_letter(i)) * phi_d.values()[i].exp())
                .collect();
        }
        Ok(TransferOperator { space, phi, weights })
    }

    #[inline]
    pub fn space(&self) -> &'s WordSpace {
        self.space
    }

    #[inline]
    pub fn potential(&self) -> &DepthKFunction {
        &self.phi
    }

    /// One-step weights `ν(w_1) e^{φ(w)}` over the words of `depth`.
    pub fn weights(&self, depth: usize) -> Result<&[f64]> {
        let start = self.phi.depth().max(2);
        if depth < start || depth > self.space.max_depth() {
            return Err(GibbsError::DepthMismatch { required: depth.max(start), available: self.space.max_depth() });
        }
        Ok(&self.weights[depth - 1])
    }

    /// Depth of `L ψ` for `ψ` of the given depth.
    pub fn output_depth(&self, psi_depth: usize) -> usize {
        (psi_depth.max(self.phi.depth()).max(2)) - 1
    }

    /// `L_φ ψ` at its natural depth `max(depth(φ), depth(ψ), 2) - 1`.
    pub fn apply(&self, psi: &DepthKFunction) -> Result<DepthKFunction> {
        let out_depth = self.output_depth(psi.depth());
        let in_depth = out_depth + 1;
        let psi_in = psi.embed(self.space, in_depth)?;
        let w = self.weights(in_depth)?;
        let vals = psi_in.values();
        let n_out = self.space.table(out_depth).len();
        let eval = |j: usize| -> f64 {
            self.space
                .front_extensions(out_depth, j)
                .iter()
                .map(|&(_, up)| w[up] * vals[up])
                .sum()
        };
        let values: Vec<f64> = if n_out >= PAR_THRESHOLD {
            (0..n_out).into_par_iter().map(eval).collect()
        } else {
            (0..n_out).map(eval).collect()
        };
        Ok(DepthKFunction::from_raw(out_depth, values))
    }

    /// `L^m ψ`.
    pub fn apply_n(&self, psi: &DepthKFunction, m: usize) -> Result<DepthKFunction> {
        let mut cur = psi.clone();
        for _ in 0..m {
            cur = self.apply(&cur)?;
        }
        Ok(cur)
    }

    /// `L_φ 1`.
    pub fn apply_to_one(&self) -> Result<DepthKFunction> {
        self.apply(&DepthKFunction::constant(self.space, 1.0))
    }

    /// `‖L_φ 1 − 1‖_∞`.
    pub fn normalization_defect(&self) -> Result<f64> {
        Ok(self.apply_to_one()?.values().iter().fold(0.0, |m, v| m.max((v - 1.0).abs())))
    }
}

/// `L_φ ψ` computed at working depth `k` and embedded back at depth `k`.
pub fn apply_ruelle(op: &TransferOperator<'_>, psi: &DepthKFunction, k: usize) -> Result<DepthKFunction> {
    let required = op.potential().depth().max(psi.depth());
    if k < required {
        return Err(GibbsError::DepthMismatch { required, available: k });
    }
    op.apply(psi)?.embed(op.space(), k)
}

/// `S_m φ(w) = Σ_{j<m} φ(σ^j w)`; the word needs `m + depth(φ) − 1` letters.
pub fn ergodic_sum(space: &WordSpace, phi: &DepthKFunction, word: &[u32], m: usize) -> Result<f64> {
    let needed = m + phi.depth() - 1;
    if word.len() < needed {
        return Err(GibbsError::WordTooShort { needed, got: word.len() });
    }
    (0..m).map(|j| phi.evaluate(space, &word[j..])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn full_shift_uniform_preserves_one() {
        let space = fixtures::full_shift_space(2, 4);
        let op = TransferOperator::new(&space, DepthKFunction::zero(&space)).unwrap();
        let one = op.apply_to_one().unwrap();
        for v in one.values() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn golden_mean_constant_one() {
        // ν(s(0)) = 1, ν(s(1)) = 1/2
        let space = fixtures::golden_mean_space(4);
        let op = TransferOperator::new(&space, DepthKFunction::zero(&space)).unwrap();
        let one = op.apply_to_one().unwrap();
        assert_eq!(one.depth(), 1);
        assert_abs_diff_eq!(one.values()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(one.values()[1], 0.5, epsilon = 1e-15);
        let embedded = apply_ruelle(&op, &DepthKFunction::constant(&space, 1.0), 3).unwrap();
        assert_eq!(embedded.depth(), 3);
        for (w, v) in space.table(3).words().zip(embedded.values()) {
            let expect = if w[0] == 0 { 1.0 } else { 0.5 };
            assert_abs_diff_eq!(*v, expect, epsilon = 1e-15);
        }
    }

    #[test]
    fn indicator_single_term() {
        let space = fixtures::golden_mean_space(5);
        let phi = DepthKFunction::from_fn(&space, 2, |w| 0.3 * w[0] as f64 - 0.2 * w[1] as f64).unwrap();
        let op = TransferOperator::new(&space, phi.clone()).unwrap();
        for b in 0..2u32 {
            let ind = DepthKFunction::indicator(&space, &[b]).unwrap();
            let out = op.apply(&ind).unwrap();
            for (w, v) in space.table(out.depth()).words().zip(out.values()) {
                let expect = if space.system().predecessors(w[0] as usize).contains(&(b as usize)) {
                    space.grid().nu(b as usize) * phi.evaluate(&space, &[b, w[0]]).unwrap().exp()
                } else {
                    0.0
                };
                assert_abs_diff_eq!(*v, expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn depth_mismatch() {
        let space = fixtures::golden_mean_space(5);
        let op = TransferOperator::new(&space, DepthKFunction::zero(&space)).unwrap();
        let psi = DepthKFunction::indicator(&space, &[0, 1, 0]).unwrap();
        assert!(matches!(apply_ruelle(&op, &psi, 2), Err(GibbsError::DepthMismatch { .. })));
    }

    #[test]
    fn ergodic_sums() {
        let space = fixtures::golden_mean_space(5);
        let x1 = DepthKFunction::from_fn(&space, 1, |w| w[0] as f64).unwrap();
        assert_eq!(ergodic_sum(&space, &x1, &[0, 1, 0], 3).unwrap(), 1.0);
        assert_eq!(ergodic_sum(&space, &x1, &[1, 0], 1).unwrap(), 1.0);
        let c = DepthKFunction::constant(&space, 0.7);
        assert_abs_diff_eq!(ergodic_sum(&space, &c, &[0, 1, 0, 0], 4).unwrap(), 2.8, epsilon = 1e-15);
        let d2 = DepthKFunction::indicator(&space, &[0, 1]).unwrap();
        assert!(matches!(ergodic_sum(&space, &d2, &[0, 1, 0], 3), Err(GibbsError::WordTooShort { .. })));
    }

    fn random_fn(space: &WordSpace, depth: usize, seed: &[f64]) -> DepthKFunction {
        let n = space.table(depth).len();
        DepthKFunction::new(space, depth, (0..n).map(|i| seed[i % seed.len()] * (1.0 + i as f64 * 0.1)).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn linear_and_positive(a in -3.0f64..3.0, b in -3.0f64..3.0, s1 in proptest::collection::vec(-1.0f64..1.0, 5), s2 in proptest::collection::vec(0.0f64..1.0, 5)) {
            let space = fixtures::golden_mean_space(6);
            let phi = DepthKFunction::from_fn(&space, 2, |w| 0.4 * w[1] as f64 - 0.1 * w[0] as f64).unwrap();
            let op = TransferOperator::new(&space, phi).unwrap();
            let f = random_fn(&space, 3, &s1);
            let g = random_fn(&space, 4, &s2);
            let combo = f.scale(a).add(&g.scale(b), &space).unwrap();
            let lhs = op.apply(&combo).unwrap();
            let rhs = op.apply(&f).unwrap().scale(a).add(&op.apply(&g).unwrap().scale(b), &space).unwrap();
            let diff = lhs.sub(&rhs, &space).unwrap();
            prop_assert!(diff.sup_norm() < 1e-12);
            // g >= 0 ⇒ L g >= 0
            prop_assert!(op.apply(&g).unwrap().min() >= 0.0);
        }

        #[test]
        fn depth_coherence(s1 in proptest::collection::vec(-1.0f64..1.0, 5)) {
            let space = fixtures::golden_mean_space(6);
            let op = TransferOperator::new(&space, DepthKFunction::from_fn(&space, 2, |w| 0.2 * (w[0] + w[1]) as f64).unwrap()).unwrap();
            let f = random_fn(&space, 3, &s1);
            let a = op.apply(&f.embed(&space, 5).unwrap()).unwrap();
            let b = op.apply(&f).unwrap().embed(&space, a.depth()).unwrap();
            prop_assert!(a.sub(&b, &space).unwrap().sup_norm() < 1e-14);
        }
    }
}
