use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::{Reduced, TransportProblem, TransportSolution, TransportSolver};
use crate::error::{GibbsError, Result};

/// Generic LP route: the primal and the dual are solved as two independent
/// linear programs, so the duality gap is a real cross-check.
#[derive(Debug, Clone, Copy, Default)]
pub struct LpSolver;

fn lp_error(e: minilp::Error) -> GibbsError {
    GibbsError::SolverFailure(format!("linear program failed: {e}"))
}

impl TransportSolver for LpSolver {
    fn name(&self) -> &'static str {
        "lp"
    }

    fn solve(&self, problem: &TransportProblem<'_>) -> Result<TransportSolution> {
        let red = Reduced::new(problem);
        let (m, n) = (red.rows.len(), red.cols.len());
        if m == 0 || n == 0 {
            let dual = red.expand_duals(problem, &[], &[]);
            return Ok(TransportSolution {
                plan: Vec::new(),
                primal: 0.0,
                dual_value: Some(problem.dual_objective(&dual.u, &dual.v)),
                dual: Some(dual),
                iterations: 0,
            });
        }

        // primal; the last column constraint is implied by the others
        let mut primal = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = red.cost.iter().map(|&c| primal.add_var(c, (0.0, f64::INFINITY))).collect();
        for i in 0..m {
            primal.add_constraint((0..n).map(|j| (vars[i * n + j], 1.0)), ComparisonOp::Eq, red.supply[i]);
        }
        for j in 0..n.saturating_sub(1) {
            primal.add_constraint((0..m).map(|i| (vars[i * n + j], 1.0)), ComparisonOp::Eq, red.demand[j]);
        }
        let sol = primal.solve().map_err(lp_error)?;
        let mut plan = Vec::new();
        let mut value = 0.0;
        for i in 0..m {
            for j in 0..n {
                let f = *sol.var_value(vars[i * n + j]);
                if f > 0.0 {
                    let (r, c) = (red.rows[i], red.cols[j]);
                    value += f * problem.c(r, c);
                    plan.push((r, c, f));
                }
            }
        }

        // dual, with the last column potential pinned to remove the free direction
        let mut dual = Problem::new(OptimizationDirection::Maximize);
        let u: Vec<_> = red.supply.iter().map(|&a| dual.add_var(a, (f64::NEG_INFINITY, f64::INFINITY))).collect();
        let v: Vec<_> = red
            .demand
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                let bounds = if j + 1 == n { (0.0, 0.0) } else { (f64::NEG_INFINITY, f64::INFINITY) };
                dual.add_var(b, bounds)
            })
            .collect();
        for i in 0..m {
            for j in 0..n {
                dual.add_constraint([(u[i], 1.0), (v[j], 1.0)], ComparisonOp::Le, red.cost[i * n + j]);
            }
        }
        let dsol = dual.solve().map_err(lp_error)?;
        let u_r: Vec<f64> = u.iter().map(|&x| *dsol.var_value(x)).collect();
        let v_r: Vec<f64> = v.iter().map(|&x| *dsol.var_value(x)).collect();
        let potentials = red.expand_duals(problem, &u_r, &v_r);
        let dual_value = problem.dual_objective(&potentials.u, &potentials.v);

        Ok(TransportSolution {
            plan,
            primal: value,
            dual: Some(potentials),
            dual_value: Some(dual_value),
            iterations: 0,
        })
    }
}
