use serde::{Deserialize, Serialize};

use super::grid::SpinGrid;
use crate::error::{GibbsError, Result};

/// A truncated sequence distance together with the certified bound on the
/// omitted tail: the true distance lies in `[value, value + remainder]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedDistance {
    pub value: f64,
    pub remainder: f64,
}

impl TruncatedDistance {
    pub fn upper(&self) -> f64 {
        (self.value + self.remainder).min(1.0)
    }
}

/// `d_X(x, y) = Σ d_M(x_n, y_n) / 2^n`, summed up to `horizon`.
pub fn seq_distance(grid: &SpinGrid, x: &[u32], y: &[u32], horizon: usize) -> Result<TruncatedDistance> {
    let needed = horizon;
    if x.len() < needed || y.len() < needed {
        return Err(GibbsError::WordTooShort { needed, got: x.len().min(y.len()) });
    }
    Ok(TruncatedDistance {
        value: truncated_distance(grid, &x[..horizon], &y[..horizon]),
        remainder: 0.5f64.powi(horizon as i32),
    })
}

/// Partial sum of `d_X` over the common length of the two words.
#[inline]
pub fn truncated_distance(grid: &SpinGrid, x: &[u32], y: &[u32]) -> f64 {
    let mut weight = 0.5;
    let mut total = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        total += weight * grid.d(a as usize, b as usize);
        weight *= 0.5;
    }
    total
}

/// Cutoff `δ` of the bounded metric `D_X = min{1, d_X / δ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub delta: f64,
    /// Lipschitz constant of `e^φ` used to pick `delta`.
    pub lip_e_phi: f64,
}

impl MetricConfig {
    /// `α_m = 2^{-(m+1)}`.
    pub fn alpha_m(m: usize) -> f64 {
        0.5f64.powi(m as i32 + 1)
    }

    /// `c_m = (Σ_{k=1}^m 2^{-k}) · Lip(e^φ)`.
    pub fn c_m(&self, m: usize) -> f64 {
        (1.0 - 0.5f64.powi(m as i32)) * self.lip_e_phi
    }

    /// Least `m` with `δ < (1 - α_m) / (2 c_m)`.
    pub fn m0(&self) -> usize {
        (1..)
            .find(|&m| {
                let c = self.c_m(m);
                c == 0.0 || self.delta < (1.0 - Self::alpha_m(m)) / (2.0 * c)
            })
            .expect("the bound tends to 1/(2 Lip) > delta")
    }

    /// Least `m_1 >= m_0` with `2^{-m_1} <= δ / 2`.
    pub fn m1(&self) -> usize {
        let m0 = self.m0();
        (m0..).find(|&m| 0.5f64.powi(m as i32) <= self.delta / 2.0).expect("delta > 0")
    }
}

/// `D_X(x, y) = min{1, d_X(x, y) / δ}` given `d_X`.
#[inline]
pub fn bounded_distance(d_x: f64, cfg: &MetricConfig) -> f64 {
    (d_x / cfg.delta).min(1.0)
}

/// Picks `δ = min(0.9 / (2 Lip(e^φ)), 0.45)`, i.e. 90% of the limiting
/// admissible cutoff and always below one half.
pub fn choose_delta(lip_e_phi: f64) -> Result<MetricConfig> {
    if !(lip_e_phi > 0.0) || !lip_e_phi.is_finite() {
        return Err(GibbsError::DegeneratePotential);
    }
    Ok(MetricConfig {
        delta: (0.9 / (2.0 * lip_e_phi)).min(0.45),
        lip_e_phi,
    })
}
