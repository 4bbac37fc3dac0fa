use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::WordMeasure;
use super::solver::{TransportProblem, TransportSolution, TransportSolver};
use crate::config_space::{bounded_distance, truncated_distance, MetricConfig, WordSpace};
use crate::error::{GibbsError, Result};

/// Largest accepted gap between the primal and dual transport values.
pub const DUALITY_GAP_TOL: f64 = 1e-9;

/// Plan marginals must reproduce their measures to this accuracy.
pub const MARGINAL_TOL: f64 = 1e-10;

/// Word-level ground distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GroundMetric {
    /// `d_X` truncated at the word depth.
    Raw,
    /// `D_X = min{1, d_X / δ}` on the truncated `d_X`.
    Bounded(MetricConfig),
}

impl GroundMetric {
    fn apply(&self, d: f64) -> f64 {
        match self {
            GroundMetric::Raw => d,
            GroundMetric::Bounded(cfg) => bounded_distance(d, cfg),
        }
    }

    /// How far the truncated cost may sit below the cost on full sequences.
    pub fn tail(&self, depth: usize) -> f64 {
        let raw = 0.5f64.powi(depth as i32);
        match self {
            GroundMetric::Raw => raw,
            GroundMetric::Bounded(cfg) => (raw / cfg.delta).min(1.0),
        }
    }
}

/// Dense cost matrix between the words of one depth.
#[derive(Debug, Clone)]
pub struct GroundCost {
    depth: usize,
    metric: GroundMetric,
    values: Vec<f64>,
    n: usize,
}

impl GroundCost {
    pub fn new(space: &WordSpace, depth: usize, metric: GroundMetric) -> Result<Self> {
        space.check_depth(depth)?;
        let table = space.table(depth);
        let grid = space.grid();
        let n = table.len();
        let values: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|k| metric.apply(truncated_distance(grid, table.word(k / n), table.word(k % n))))
            .collect();
        Ok(GroundCost { depth, metric, values, n })
    }

    /// 0 when the first `k` letters agree, 1 otherwise.
    fn prefix_mismatch(space: &WordSpace, k: usize) -> Result<Self> {
        space.check_depth(k)?;
        let n = space.table(k).len();
        let values = (0..n * n).map(|c| if c / n == c % n { 0.0 } else { 1.0 }).collect();
        Ok(GroundCost { depth: k, metric: GroundMetric::Raw, values, n })
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    pub fn metric(&self) -> GroundMetric {
        self.metric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Transport distance between two word measures together with the tail
/// interval that brackets the distance between the underlying sequence measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WassersteinValue {
    pub value: f64,
    pub upper: f64,
    pub duality_gap: f64,
}

/// Joint masses on pairs of words of a common depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub depth: usize,
    /// `(row word, column word, mass)` with positive mass, sorted.
    pub entries: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

impl Coupling {
    pub fn row_marginal(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(i, _, m) in &self.entries {
            out[i] += m;
        }
        out
    }

    pub fn column_marginal(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(_, j, m) in &self.entries {
            out[j] += m;
        }
        out
    }

    /// Largest marginal deviation from `(mu, eta)`.
    pub fn marginal_error(&self, mu: &WordMeasure, eta: &WordMeasure) -> f64 {
        let n = mu.masses().len();
        let dev = |a: Vec<f64>, b: &[f64]| a.iter().zip(b).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
        dev(self.row_marginal(n), mu.masses()).max(dev(self.column_marginal(n), eta.masses()))
    }
}

fn check_pair(mu: &WordMeasure, eta: &WordMeasure, cost: &GroundCost) -> Result<()> {
    if mu.depth() != eta.depth() {
        return Err(GibbsError::DepthMismatch { required: mu.depth(), available: eta.depth() });
    }
    if mu.depth() != cost.depth() {
        return Err(GibbsError::DepthMismatch { required: mu.depth(), available: cost.depth() });
    }
    Ok(())
}

fn solve_checked(
    supply: &[f64],
    demand: &[f64],
    cost: &[f64],
    solver: &dyn TransportSolver,
) -> Result<TransportSolution> {
    let problem = TransportProblem::new(supply, demand, cost)?;
    let sol = solver.solve(&problem)?;
    if let Some(gap) = sol.duality_gap() {
        if gap > DUALITY_GAP_TOL {
            return Err(GibbsError::SolverFailure(format!(
                "{}: duality gap {gap:e} exceeds {DUALITY_GAP_TOL:e}",
                solver.name()
            )));
        }
    }
    Ok(sol)
}

/// `W` under a precomputed cost matrix.
pub fn wasserstein_with_cost(
    mu: &WordMeasure,
    eta: &WordMeasure,
    cost: &GroundCost,
    solver: &dyn TransportSolver,
) -> Result<WassersteinValue> {
    check_pair(mu, eta, cost)?;
    // the cost is symmetric, so a fixed argument order makes W exactly symmetric
    let swap = mu.masses().iter().zip(eta.masses()).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne())
        == Some(std::cmp::Ordering::Greater);
    let (a, b) = if swap { (eta, mu) } else { (mu, eta) };
    let sol = solve_checked(a.masses(), b.masses(), cost.values(), solver)?;
    let value = sol.primal.max(0.0);
    let cap = match cost.metric() {
        GroundMetric::Raw => f64::INFINITY,
        GroundMetric::Bounded(_) => 1.0,
    };
    Ok(WassersteinValue {
        value,
        upper: (value + cost.metric().tail(cost.depth())).min(cap),
        duality_gap: sol.duality_gap().unwrap_or(f64::NAN),
    })
}

/// Exact transport distance between two word measures of equal depth.
pub fn wasserstein(
    space: &WordSpace,
    mu: &WordMeasure,
    eta: &WordMeasure,
    metric: GroundMetric,
    solver: &dyn TransportSolver,
) -> Result<WassersteinValue> {
    let cost = GroundCost::new(space, mu.depth(), metric)?;
    wasserstein_with_cost(mu, eta, &cost, solver)
}

/// Optimal coupling realizing [`wasserstein`].
pub fn optimal_plan(
    space: &WordSpace,
    mu: &WordMeasure,
    eta: &WordMeasure,
    metric: GroundMetric,
    solver: &dyn TransportSolver,
) -> Result<Coupling> {
    let cost = GroundCost::new(space, mu.depth(), metric)?;
    check_pair(mu, eta, &cost)?;
    let sol = solve_checked(mu.masses(), eta.masses(), cost.values(), solver)?;
    let coupling = Coupling { depth: mu.depth(), cost: sol.primal, entries: sol.plan };
    let err = coupling.marginal_error(mu, eta);
    if err > MARGINAL_TOL {
        return Err(GibbsError::SolverFailure(format!("plan marginals off by {err:e}")));
    }
    Ok(coupling)
}

/// Largest mass a coupling of `mu` and `eta` can put on pairs that agree in
/// their first `k` letters.
pub fn diagonal_mass(
    space: &WordSpace,
    mu: &WordMeasure,
    eta: &WordMeasure,
    k: usize,
    solver: &dyn TransportSolver,
) -> Result<f64> {
    if mu.depth() < k || eta.depth() < k {
        return Err(GibbsError::DepthMismatch { required: k, available: mu.depth().min(eta.depth()) });
    }
    let (a, b) = (mu.marginal(space, k)?, eta.marginal(space, k)?);
    let cost = GroundCost::prefix_mismatch(space, k)?;
    let sol = solve_checked(a.masses(), b.masses(), cost.values(), solver)?;
    Ok((a.total_mass() - sol.primal).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config_space::choose_delta;
    use crate::fixtures;
    use crate::transport::solver::{LpSolver, NetworkSimplex};

    #[test]
    fn trivial_cases() {
        let space = fixtures::golden_mean_space(4);
        let solver = NetworkSimplex::default();
        let cfg = choose_delta(1.0).unwrap();
        let mu = WordMeasure::uniform(&space, 4).unwrap();
        let w = wasserstein(&space, &mu, &mu, GroundMetric::Bounded(cfg), &solver).unwrap();
        assert_eq!(w.value, 0.0);
        let plan = optimal_plan(&space, &mu, &mu, GroundMetric::Raw, &solver).unwrap();
        assert!(plan.entries.iter().all(|&(i, j, _)| i == j));
        assert_eq!(diagonal_mass(&space, &mu, &mu, 3, &solver).unwrap(), 1.0);

        let table = space.table(4);
        let (x, y) = (0, table.len() - 1);
        let dx = WordMeasure::dirac(&space, 4, x).unwrap();
        let dy = WordMeasure::dirac(&space, 4, y).unwrap();
        let w = wasserstein(&space, &dx, &dy, GroundMetric::Bounded(cfg), &solver).unwrap();
        let expect = bounded_distance(truncated_distance(space.grid(), table.word(x), table.word(y)), &cfg);
        assert_eq!(w.value, expect);
        let plan = optimal_plan(&space, &dx, &dy, GroundMetric::Raw, &solver).unwrap();
        assert_eq!(plan.entries, vec![(x, y, 1.0)]);
        assert_eq!(diagonal_mass(&space, &dx, &dy, 1, &solver).unwrap(), 0.0);
    }

    #[test]
    fn half_mass_at_unit_distance() {
        // two words at bounded distance 1: (1/2, 1/2) against (1, 0) costs 1/2
        let space = fixtures::full_shift_space(2, 1);
        let cfg = choose_delta(5.0).unwrap();
        let mu = WordMeasure::new(&space, 1, vec![0.5, 0.5]).unwrap();
        let eta = WordMeasure::new(&space, 1, vec![1.0, 0.0]).unwrap();
        for solver in [&NetworkSimplex::default() as &dyn TransportSolver, &LpSolver] {
            let w = wasserstein(&space, &mu, &eta, GroundMetric::Bounded(cfg), solver).unwrap();
            assert!((w.value - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_mass_is_one_minus_total_variation() {
        let space = fixtures::full_shift_space(3, 3);
        let mu = WordMeasure::product(&space, 3, &[0.2, 0.3, 0.5]).unwrap();
        let eta = WordMeasure::product(&space, 3, &[0.6, 0.1, 0.3]).unwrap();
        let d = diagonal_mass(&space, &mu, &eta, 2, &NetworkSimplex::default()).unwrap();
        let tv = mu.marginal(&space, 2).unwrap().total_variation(&eta.marginal(&space, 2).unwrap());
        assert!((d - (1.0 - tv)).abs() < 1e-12);
    }
}
