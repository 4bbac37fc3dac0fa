use serde::{Deserialize, Serialize};

use crate::error::{GibbsError, Result};

const METRIC_TOL: f64 = 1e-12;
const WEIGHT_TOL: f64 = 1e-12;

/// Finite discretization of the compact spin space together with its metric
/// and the a priori measure.
///
/// The distance matrix is stored row-major and is normalized so the diameter
/// never exceeds one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinGrid {
    points: Vec<f64>,
    distance: Vec<f64>,
    nu: Vec<f64>,
}

impl SpinGrid {
    /// Uniform `n`-point grid on `[0, 1]` with `d(x, y) = |x - y|` and uniform weights.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(GibbsError::InvalidGrid("grid must have at least one point".into()));
        }
        let points: Vec<f64> = if n == 1 {
            vec![0.0]
        } else {
            (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
        };
        let nu = vec![1.0 / n as f64; n];
        Self::with_interval_metric(points, nu)
    }

    /// Grid whose metric is the absolute difference of coordinates in `[0, 1]`.
    pub fn with_interval_metric(points: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        let n = points.len();
        let mut distance = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                distance[i * n + j] = (points[i] - points[j]).abs();
            }
        }
        Self::new(points, distance, nu)
    }

    pub fn new(points: Vec<f64>, distance: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        let grid = SpinGrid { points, distance, nu };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        let n = self.points.len();
        let bad = |msg: String| Err(GibbsError::InvalidGrid(msg));
        if n == 0 {
            return bad("grid must have at least one point".into());
        }
        if self.distance.len() != n * n {
            return bad(format!("distance matrix has {} entries, expected {}", self.distance.len(), n * n));
        }
        if self.nu.len() != n {
            return bad(format!("nu has {} weights, expected {n}", self.nu.len()));
        }
        if self.points.iter().any(|p| !p.is_finite()) {
            return bad("non-finite grid coordinate".into());
        }
        for i in 0..n {
            if self.d(i, i).abs() > METRIC_TOL {
                return bad(format!("d({i},{i}) != 0"));
            }
            for j in 0..n {
                let dij = self.d(i, j);
                if !dij.is_finite() || dij < 0.0 {
                    return bad(format!("d({i},{j}) = {dij} is not a nonnegative real"));
                }
                if dij > 1.0 + METRIC_TOL {
                    return bad(format!("d({i},{j}) = {dij} exceeds the unit diameter"));
                }
                if (dij - self.d(j, i)).abs() > METRIC_TOL {
                    return bad(format!("distance matrix is not symmetric at ({i},{j})"));
                }
                if i != j && dij <= 0.0 {
                    return bad(format!("distinct points {i} and {j} are at distance zero"));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.d(i, k) > self.d(i, j) + self.d(j, k) + METRIC_TOL {
                        return bad(format!("triangle inequality fails on ({i},{j},{k})"));
                    }
                }
            }
        }
        if self.nu.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return bad("nu weights must be nonnegative".into());
        }
        let total: f64 = self.nu.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return bad(format!("nu weights sum to {total}, expected 1"));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `d_M` between two grid indices.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.distance[i * self.points.len() + j]
    }

    #[inline]
    pub fn nu(&self, i: usize) -> f64 {
        self.nu[i]
    }

    pub fn nu_weights(&self) -> &[f64] {
        &self.nu
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn distance_matrix(&self) -> &[f64] {
        &self.distance
    }

    pub fn diameter(&self) -> f64 {
        self.distance.iter().copied().fold(0.0, f64::max)
    }

    /// Largest gap between a point and its nearest neighbour; the
    /// discretization error of downstream quantities scales with it.
    pub fn mesh(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.d(i, j))
                    .fold(f64::INFINITY, f64::min)
            })
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
    }
}
