use super::{Reduced, TransportProblem, TransportSolution, TransportSolver};
use crate::error::{GibbsError, Result};

/// Entropic regularisation solved by log-domain Sinkhorn scaling.
///
/// Approximate: the reported primal is the transport cost of the regularised
/// plan, an upper bound on the true optimum. Not accepted wherever an exact
/// value is required.
#[derive(Debug, Clone)]
pub struct Sinkhorn {
    pub epsilon: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for Sinkhorn {
    fn default() -> Self {
        Sinkhorn { epsilon: 5e-3, max_iterations: 20_000, tolerance: 1e-10 }
    }
}

fn log_sum_exp(it: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = it.collect();
    let mx = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return mx;
    }
    mx + v.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}

impl TransportSolver for Sinkhorn {
    fn name(&self) -> &'static str {
        "sinkhorn"
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn solve(&self, problem: &TransportProblem<'_>) -> Result<TransportSolution> {
        if !(self.epsilon > 0.0) {
            return Err(GibbsError::InvalidArgument("sinkhorn epsilon must be positive".into()));
        }
        let red = Reduced::new(problem);
        let (m, n) = (red.rows.len(), red.cols.len());
        if m == 0 || n == 0 {
            return Ok(TransportSolution { plan: Vec::new(), primal: 0.0, dual: None, dual_value: None, iterations: 0 });
        }
        let eps = self.epsilon;
        let la: Vec<f64> = red.supply.iter().map(|x| x.ln()).collect();
        let lb: Vec<f64> = red.demand.iter().map(|x| x.ln()).collect();
        let c = &red.cost;
        let mut f = vec![0.0; m];
        let mut g = vec![0.0; n];
        let mut iterations = 0;
        loop {
            iterations += 1;
            for i in 0..m {
                f[i] = eps * la[i] - eps * log_sum_exp((0..n).map(|j| (g[j] - c[i * n + j]) / eps));
            }
            for j in 0..n {
                g[j] = eps * lb[j] - eps * log_sum_exp((0..m).map(|i| (f[i] - c[i * n + j]) / eps));
            }
            // column marginals are exact after the g-update; check the rows
            let err: f64 = (0..m)
                .map(|i| {
                    let row: f64 = (0..n).map(|j| ((f[i] + g[j] - c[i * n + j]) / eps).exp()).sum();
                    (row - red.supply[i]).abs()
                })
                .sum();
            if err < self.tolerance || iterations >= self.max_iterations {
                break;
            }
        }
        let mut plan = Vec::new();
        let mut primal = 0.0;
        for i in 0..m {
            for j in 0..n {
                let p = ((f[i] + g[j] - c[i * n + j]) / eps).exp();
                if p > 0.0 {
                    primal += p * c[i * n + j];
                    plan.push((red.rows[i], red.cols[j], p));
                }
            }
        }
        Ok(TransportSolution { plan, primal, dual: None, dual_value: None, iterations })
    }
}
