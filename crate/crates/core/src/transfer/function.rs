use serde::{Deserialize, Serialize};

use crate::config_space::WordSpace;
use crate::error::{GibbsError, Result};

/// A locally constant function: its value at a sequence depends only on the
/// first `depth` coordinates, and is tabulated over the admissible words of
/// that length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthKFunction {
    depth: usize,
    values: Vec<f64>,
}

impl DepthKFunction {
    pub fn new(space: &WordSpace, depth: usize, values: Vec<f64>) -> Result<Self> {
        space.check_depth(depth)?;
        let expected = space.table(depth).len();
        if values.len() != expected {
            return Err(GibbsError::InvalidArgument(format!(
                "depth-{depth} function needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GibbsError::InvalidArgument(format!("value {i} is not finite")));
        }
        Ok(DepthKFunction { depth, values })
    }

    pub(crate) fn from_raw(depth: usize, values: Vec<f64>) -> Self {
        DepthKFunction { depth, values }
    }

    pub fn constant(space: &WordSpace, c: f64) -> Self {
        DepthKFunction { depth: 1, values: vec![c; space.table(1).len()] }
    }

    pub fn zero(space: &WordSpace) -> Self {
        Self::constant(space, 0.0)
    }

    pub fn from_fn(space: &WordSpace, depth: usize, f: impl Fn(&[u32]) -> f64) -> Result<Self> {
        space.check_depth(depth)?;
        let values = space.table(depth).words().map(f).collect();
        Self::new(space, depth, values)
    }

    /// Indicator of the cylinder `[word]`.
    pub fn indicator(space: &WordSpace, word: &[u32]) -> Result<Self> {
        Self::from_fn(space, word.len(), |w| if w == word { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at a word (or point prefix) of length at least `depth`.
    pub fn evaluate(&self, space: &WordSpace, word: &[u32]) -> Result<f64> {
        if word.len() < self.depth {
            return Err(GibbsError::WordTooShort { needed: self.depth, got: word.len() });
        }
        space
            .table(self.depth)
            .index_of(&word[..self.depth])
            .map(|i| self.values[i])
            .ok_or_else(|| GibbsError::InvalidArgument(format!("word {word:?} is not admissible")))
    }

    /// Same function tabulated at a larger depth.
    pub fn embed(&self, space: &WordSpace, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(GibbsError::DepthMismatch { required: self.depth, available: depth });
        }
        space.check_depth(depth)?;
        if depth == self.depth {
            return Ok(self.clone());
        }
        let map = space.prefix_map(depth, self.depth);
        Ok(DepthKFunction {
            depth,
            values: map.iter().map(|&i| self.values[i]).collect(),
        })
    }

    /// `ψ ∘ σ`, one level deeper.
    pub fn compose_shift(&self, space: &WordSpace) -> Result<Self> {
        self.compose_shift_n(space, 1)
    }

    /// `ψ ∘ σ^n`.
    pub fn compose_shift_n(&self, space: &WordSpace, n: usize) -> Result<Self> {
        let depth = self.depth + n;
        space.check_depth(depth).map_err(|_| GibbsError::DepthMismatch {
            required: depth,
            available: space.max_depth(),
        })?;
        let map = space.window_map(depth, n, self.depth);
        Ok(DepthKFunction {
            depth,
            values: map.iter().map(|&i| self.values[i]).collect(),
        })
    }

    /// Pointwise combination after embedding both operands at the larger depth.
    pub fn zip_with(&self, other: &Self, space: &WordSpace, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let depth = self.depth.max(other.depth);
        let a = self.embed(space, depth)?;
        let b = other.embed(space, depth)?;
        Ok(DepthKFunction {
            depth,
            values: a.values.iter().zip(&b.values).map(|(&x, &y)| f(x, y)).collect(),
        })
    }

    pub fn add(&self, other: &Self, space: &WordSpace) -> Result<Self> {
        self.zip_with(other, space, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self, space: &WordSpace) -> Result<Self> {
        self.zip_with(other, space, |x, y| x - y)
    }

    pub fn mul(&self, other: &Self, space: &WordSpace) -> Result<Self> {
        self.zip_with(other, space, |x, y| x * y)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        DepthKFunction {
            depth: self.depth,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub fn offset(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest depth at which the function is still exactly represented.
    pub fn effective_depth(&self, space: &WordSpace) -> usize {
        let mut best = self.depth;
        for d in (1..self.depth).rev() {
            let map = space.prefix_map(self.depth, d);
            let mut seen: Vec<Option<f64>> = vec![None; space.table(d).len()];
            let consistent = map.iter().zip(&self.values).all(|(&p, &v)| match seen[p] {
                None => {
                    seen[p] = Some(v);
                    true
                }
                Some(u) => u == v,
            });
            if !consistent {
                break;
            }
            best = d;
        }
        best
    }

    /// Drops redundant trailing coordinates.
    pub fn reduce(&self, space: &WordSpace) -> Self {
        let d = self.effective_depth(space);
        if d == self.depth {
            return self.clone();
        }
        let map = space.prefix_map(self.depth, d);
        let mut values = vec![0.0; space.table(d).len()];
        for (&p, &v) in map.iter().zip(&self.values) {
            values[p] = v;
        }
        DepthKFunction { depth: d, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn embedding_is_exact() {
        let space = fixtures::golden_mean_space(6);
        let f = DepthKFunction::from_fn(&space, 2, |w| (w[0] * 3 + w[1]) as f64).unwrap();
        let g = f.embed(&space, 5).unwrap();
        for w in space.table(5).words() {
            assert_eq!(f.evaluate(&space, w).unwrap(), g.evaluate(&space, w).unwrap());
        }
        assert_eq!(g.reduce(&space), f);
        assert!(f.embed(&space, 1).is_err());
    }

    #[test]
    fn shift_composition() {
        let space = fixtures::golden_mean_space(6);
        let f = DepthKFunction::from_fn(&space, 2, |w| (w[0] + 2 * w[1]) as f64).unwrap();
        let g = f.compose_shift_n(&space, 2).unwrap();
        assert_eq!(g.depth(), 4);
        for w in space.table(4).words() {
            assert_eq!(g.evaluate(&space, w).unwrap(), f.evaluate(&space, &w[2..]).unwrap());
        }
    }

    proptest! {
        #[test]
        fn embed_preserves_evaluations(vals in proptest::collection::vec(-5.0f64..5.0, 8), depth in 3usize..7) {
            let space = fixtures::full_shift_space(2, 7);
            let f = DepthKFunction::new(&space, 3, vals).unwrap();
            let g = f.embed(&space, depth).unwrap();
            for w in space.table(depth).words() {
                prop_assert_eq!(f.evaluate(&space, w).unwrap(), g.evaluate(&space, w).unwrap());
            }
        }
    }
}
