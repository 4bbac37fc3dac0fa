use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GibbsError, Result};
use crate::transfer::TransferOperator;
use crate::transport::{GibbsSolution, NORMALIZATION_TOL};

/// Draws Gibbs-distributed sequences by repeatedly prepending a letter
/// `a ∈ s(x_1)` with probability `ν(a) e^{φ(a x)}`.
///
/// The kernel depends on the current sequence only through its first
/// `k = max(depth(φ), 2) − 1` letters, so the state is a `k`-word index.
/// Chains start from the `k`-word marginal of the Gibbs state, which the
/// kernel leaves invariant.
pub struct GibbsSampler<'a> {
    op: &'a TransferOperator<'a>,
    front_depth: usize,
    start_cdf: Vec<f64>,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(op: &'a TransferOperator<'a>, solution: &GibbsSolution) -> Result<Self> {
        let deviation = op.normalization_defect()?;
        if deviation > NORMALIZATION_TOL {
            return Err(GibbsError::NotNormalized { deviation });
        }
        let front_depth = op.potential().depth().max(2) - 1;
        let marginal = solution.measure.marginal(op.space(), front_depth)?;
        let mut acc = 0.0;
        let mut start_cdf: Vec<f64> = marginal
            .masses()
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        let total = acc;
        start_cdf.iter_mut().for_each(|c| *c /= total);
        Ok(GibbsSampler { op, front_depth, start_cdf })
    }

    fn pick(cdf: impl Iterator<Item = f64>, u: f64) -> Option<usize> {
        let mut last = None;
        for (i, c) in cdf.enumerate() {
            last = Some(i);
            if u < c {
                return Some(i);
            }
        }
        last
    }

    /// Generates `burn_in + length` letters and returns the newest `length`
    /// in sequence order (newest letter first).
    pub fn run(&self, rng: &mut ChaCha8Rng, burn_in: usize, length: usize) -> Result<Vec<u32>> {
        let space = self.op.space();
        let k = self.front_depth;
        let weights = self.op.weights(k + 1)?;
        let upper = space.table(k + 1);
        let mut front = Self::pick(self.start_cdf.iter().copied(), rng.random::<f64>())
            .ok_or_else(|| GibbsError::InvalidArgument("empty start law".into()))?;
        let total = burn_in + length;
        let mut generated = Vec::with_capacity(total);
        for _ in 0..total {
            let ext = space.front_extensions(k, front);
            let norm: f64 = ext.iter().map(|&(_, up)| weights[up]).sum();
            let u = rng.random::<f64>() * norm;
            let mut acc = 0.0;
            let choice = Self::pick(
                ext.iter().map(|&(_, up)| {
                    acc += weights[up];
                    acc
                }),
                u,
            )
            .expect("s(x_1) is nonempty");
            let (a, up) = ext[choice];
            generated.push(a as u32);
            front = upper.prefix_index(up);
        }
        Ok(generated[burn_in..].iter().rev().copied().collect())
    }
}

/// `length` symbols of a Gibbs orbit after discarding `burn_in` symbols at
/// the seed end. Deterministic in `seed`.
pub fn sample_orbit(
    op: &TransferOperator<'_>,
    solution: &GibbsSolution,
    length: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<u32>> {
    let sampler = GibbsSampler::new(op, solution)?;
    let mut rng = block_rng(seed, 0);
    sampler.run(&mut rng, burn_in, length)
}

/// Generator for independent block `stream` under master `seed`.
pub fn block_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `max(5 t, 100)` with `t = ⌈−1 / ln Λ̂⌉` the e-folding time of correlations.
pub fn default_burn_in(rate: f64) -> usize {
    let t = if rate <= 0.0 {
        1
    } else if rate >= 1.0 {
        return 10_000;
    } else {
        (-1.0 / rate.ln()).ceil() as usize
    };
    (5 * t).max(100)
}
