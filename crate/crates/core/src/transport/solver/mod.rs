//! Discrete optimal-transport backends.
//!
//! Every backend implements [`TransportSolver`] and is looked up by name in a
//! [`SolverRegistry`], so the CLI and the fixed-point driver can pick one at
//! runtime.

mod lp;
mod network_simplex;
mod sinkhorn;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GibbsError, Result};

pub use lp::LpSolver;
pub use network_simplex::NetworkSimplex;
pub use sinkhorn::Sinkhorn;

/// Relative supply/demand imbalance tolerated before a problem is rejected.
pub const BALANCE_TOL: f64 = 1e-9;

/// A balanced transportation problem with a dense row-major cost matrix.
#[derive(Debug, Clone, Copy)]
pub struct TransportProblem<'a> {
    pub supply: &'a [f64],
    pub demand: &'a [f64],
    pub cost: &'a [f64],
}

impl<'a> TransportProblem<'a> {
    pub fn new(supply: &'a [f64], demand: &'a [f64], cost: &'a [f64]) -> Result<Self> {
        if cost.len() != supply.len() * demand.len() {
            return Err(GibbsError::SolverFailure(format!(
                "cost matrix has {} entries, expected {}x{}",
                cost.len(),
                supply.len(),
                demand.len()
            )));
        }
        if supply.iter().chain(demand).any(|m| !m.is_finite() || *m < 0.0) {
            return Err(GibbsError::SolverFailure("masses must be finite and nonnegative".into()));
        }
        let (s, d): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
        if (s - d).abs() > BALANCE_TOL * s.max(d).max(1.0) {
            return Err(GibbsError::SolverFailure(format!("unbalanced problem: supply {s}, demand {d}")));
        }
        Ok(TransportProblem { supply, demand, cost })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.supply.len()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.demand.len()
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.demand.len() + j]
    }

    /// `Σ a_i u_i + Σ b_j v_j`.
    pub fn dual_objective(&self, u: &[f64], v: &[f64]) -> f64 {
        self.supply.iter().zip(u).map(|(a, x)| a * x).sum::<f64>()
            + self.demand.iter().zip(v).map(|(b, y)| b * y).sum::<f64>()
    }

    /// Largest violation of `u_i + v_j <= c_ij`.
    pub fn dual_infeasibility(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                worst = worst.max(u[i] + v[j] - self.c(i, j));
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPotentials {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSolution {
    /// Positive entries `(row, col, mass)` of the plan.
    pub plan: Vec<(usize, usize, f64)>,
    pub primal: f64,
    pub dual: Option<DualPotentials>,
    pub dual_value: Option<f64>,
    pub iterations: usize,
}

impl TransportSolution {
    pub fn duality_gap(&self) -> Option<f64> {
        self.dual_value.map(|d| (self.primal - d).abs())
    }
}

pub trait TransportSolver: Send + Sync {
    /// Registry key.
    fn name(&self) -> &'static str;

    /// Whether the solver returns an exact optimum (up to round-off).
    fn is_exact(&self) -> bool {
        true
    }

    fn solve(&self, problem: &TransportProblem<'_>) -> Result<TransportSolution>;
}

/// Named collection of transport backends.
#[derive(Clone, Default)]
pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Arc<dyn TransportSolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `network-simplex`, `lp` and `sinkhorn`.
    pub fn with_defaults() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(NetworkSimplex::default()));
        reg.register(Arc::new(LpSolver));
        reg.register(Arc::new(Sinkhorn::default()));
        reg
    }

    pub fn register(&mut self, solver: Arc<dyn TransportSolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn TransportSolver>> {
        self.solvers.get(name).cloned().ok_or_else(|| {
            GibbsError::InvalidArgument(format!(
                "unknown transport solver '{name}' (available: {})",
                self.names().join(", ")
            ))
        })
    }

    /// Like [`get`](Self::get) but refuses approximate backends.
    pub fn get_exact(&self, name: &str) -> Result<Arc<dyn TransportSolver>> {
        let s = self.get(name)?;
        if s.is_exact() {
            Ok(s)
        } else {
            Err(GibbsError::InvalidArgument(format!("solver '{name}' is approximate")))
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }
}

impl std::fmt::Debug for SolverRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolverRegistry").field("solvers", &self.names()).finish()
    }
}

/// Positive-mass rows and columns, with the demand rescaled to the supply total.
pub(crate) struct Reduced {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub supply: Vec<f64>,
    pub demand: Vec<f64>,
    pub cost: Vec<f64>,
}

impl Reduced {
    pub fn new(p: &TransportProblem<'_>) -> Self {
        let rows: Vec<usize> = (0..p.rows()).filter(|&i| p.supply[i] > 0.0).collect();
        let cols: Vec<usize> = (0..p.cols()).filter(|&j| p.demand[j] > 0.0).collect();
        let supply: Vec<f64> = rows.iter().map(|&i| p.supply[i]).collect();
        let mut demand: Vec<f64> = cols.iter().map(|&j| p.demand[j]).collect();
        let (s, d): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
        if d > 0.0 && s != d {
            let r = s / d;
            demand.iter_mut().for_each(|x| *x *= r);
        }
        let mut cost = Vec::with_capacity(rows.len() * cols.len());
        for &i in &rows {
            for &j in &cols {
                cost.push(p.c(i, j));
            }
        }
        Reduced { rows, cols, supply, demand, cost }
    }

    /// Extends potentials of the reduced problem to every row and column while
    /// keeping `u_i + v_j <= c_ij`.
    pub fn expand_duals(&self, p: &TransportProblem<'_>, u_r: &[f64], v_r: &[f64]) -> DualPotentials {
        let mut u = vec![f64::NAN; p.rows()];
        let mut v = vec![f64::NAN; p.cols()];
        for (k, &i) in self.rows.iter().enumerate() {
            u[i] = u_r[k];
        }
        for (k, &j) in self.cols.iter().enumerate() {
            v[j] = v_r[k];
        }
        for i in 0..p.rows() {
            if u[i].is_nan() {
                u[i] = self
                    .cols
                    .iter()
                    .map(|&j| p.c(i, j) - v[j])
                    .fold(f64::INFINITY, f64::min);
                if !u[i].is_finite() {
                    u[i] = 0.0;
                }
            }
        }
        for j in 0..p.cols() {
            if v[j].is_nan() {
                v[j] = (0..p.rows()).map(|i| p.c(i, j) - u[i]).fold(f64::INFINITY, f64::min);
                if !v[j].is_finite() {
                    v[j] = 0.0;
                }
            }
        }
        DualPotentials { u, v }
    }
}
