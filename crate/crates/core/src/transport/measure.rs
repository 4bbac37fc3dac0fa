use serde::{Deserialize, Serialize};

use crate::config_space::{CylinderSet, WordSpace};
use crate::error::{GibbsError, Result};
use crate::transfer::DepthKFunction;

/// Tolerance on total mass of a probability vector.
pub const MASS_TOL: f64 = 1e-12;

/// Cylinder masses of a probability measure on the admissible `k`-words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordMeasure {
    depth: usize,
    masses: Vec<f64>,
}

impl WordMeasure {
    pub fn new(space: &WordSpace, depth: usize, masses: Vec<f64>) -> Result<Self> {
        let m = Self::unchecked(space, depth, masses)?;
        let total = m.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(GibbsError::InvalidArgument(format!("masses sum to {total}, expected 1")));
        }
        Ok(m)
    }

    /// Nonnegative masses with no constraint on the total.
    pub fn unchecked(space: &WordSpace, depth: usize, masses: Vec<f64>) -> Result<Self> {
        space.check_depth(depth)?;
        let expected = space.table(depth).len();
        if masses.len() != expected {
            return Err(GibbsError::InvalidArgument(format!(
                "depth-{depth} measure needs {expected} masses, got {}",
                masses.len()
            )));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(GibbsError::InvalidArgument("masses must be nonnegative".into()));
        }
        Ok(WordMeasure { depth, masses })
    }

    pub(crate) fn from_raw(depth: usize, masses: Vec<f64>) -> Self {
        WordMeasure { depth, masses }
    }

    pub fn uniform(space: &WordSpace, depth: usize) -> Result<Self> {
        space.check_depth(depth)?;
        let n = space.table(depth).len();
        Ok(WordMeasure { depth, masses: vec![1.0 / n as f64; n] })
    }

    pub fn dirac(space: &WordSpace, depth: usize, index: usize) -> Result<Self> {
        space.check_depth(depth)?;
        let n = space.table(depth).len();
        if index >= n {
            return Err(GibbsError::InvalidArgument(format!("word index {index} out of range")));
        }
        let mut masses = vec![0.0; n];
        masses[index] = 1.0;
        Ok(WordMeasure { depth, masses })
    }

    /// Product measure with one-letter law `p`.
    pub fn product(space: &WordSpace, depth: usize, p: &[f64]) -> Result<Self> {
        space.check_depth(depth)?;
        let masses = space
            .table(depth)
            .words()
            .map(|w| w.iter().map(|&a| p[a as usize]).product())
            .collect();
        Self::unchecked(space, depth, masses)
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn normalized(mut self) -> Self {
        let t = self.total_mass();
        if t > 0.0 {
            self.masses.iter_mut().for_each(|m| *m /= t);
        }
        self
    }

    /// Masses of the length-`depth` cylinders obtained by summing out trailing letters.
    pub fn marginal(&self, space: &WordSpace, depth: usize) -> Result<WordMeasure> {
        if depth > self.depth || depth == 0 {
            return Err(GibbsError::DepthMismatch { required: depth.max(1), available: self.depth });
        }
        if depth == self.depth {
            return Ok(self.clone());
        }
        let map = space.prefix_map(self.depth, depth);
        let mut masses = vec![0.0; space.table(depth).len()];
        for (&p, &m) in map.iter().zip(&self.masses) {
            masses[p] += m;
        }
        Ok(WordMeasure { depth, masses })
    }

    /// `∫ ψ dμ` for `depth(ψ) <= depth(μ)`.
    pub fn integrate(&self, space: &WordSpace, psi: &DepthKFunction) -> Result<f64> {
        if psi.depth() > self.depth {
            return Err(GibbsError::DepthMismatch { required: psi.depth(), available: self.depth });
        }
        let marginal = self.marginal(space, psi.depth())?;
        Ok(marginal.masses.iter().zip(psi.values()).map(|(m, v)| m * v).sum())
    }

    /// `‖ψ‖_p` in `L^p(μ)`.
    pub fn lp_norm(&self, space: &WordSpace, psi: &DepthKFunction, p: f64) -> Result<f64> {
        Ok(self.integrate(space, &psi.map(|v| v.abs().powf(p)))?.powf(1.0 / p))
    }

    /// `μ(C)` for a cylinder of depth at most `depth(μ)`.
    pub fn cylinder_mass(&self, space: &WordSpace, c: &CylinderSet) -> Result<f64> {
        if c.depth() > self.depth {
            return Err(GibbsError::DepthMismatch { required: c.depth(), available: self.depth });
        }
        if c.depth() == 0 {
            return Ok(self.total_mass());
        }
        let marginal = self.marginal(space, c.depth())?;
        Ok(space
            .table(c.depth())
            .words()
            .zip(&marginal.masses)
            .filter(|(w, _)| c.contains(w))
            .map(|(_, m)| m)
            .sum())
    }

    /// Largest violation of `μ(σ^{-1}[w]) = μ([w])` over `(k−1)`-words.
    pub fn shift_invariance_residual(&self, space: &WordSpace) -> Result<f64> {
        if self.depth < 2 {
            return Ok(0.0);
        }
        let lower = self.depth - 1;
        let table = space.table(self.depth);
        let mut pulled = vec![0.0; space.table(lower).len()];
        for (i, &m) in self.masses.iter().enumerate() {
            pulled[table.tail_index(i)] += m;
        }
        let marginal = self.marginal(space, lower)?;
        Ok(pulled
            .iter()
            .zip(&marginal.masses)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }

    /// Total-variation distance (half the `ℓ¹` gap).
    pub fn total_variation(&self, other: &WordMeasure) -> f64 {
        0.5 * self.masses.iter().zip(&other.masses).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

/// `μ(C)`; see [`WordMeasure::cylinder_mass`].
pub fn cylinder_mass(space: &WordSpace, mu: &WordMeasure, c: &CylinderSet) -> Result<f64> {
    mu.cylinder_mass(space, c)
}
