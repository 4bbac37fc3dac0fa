use std::collections::VecDeque;

use super::{Reduced, TransportProblem, TransportSolution, TransportSolver};
use crate::error::{GibbsError, Result};

/// Primal network simplex on the bipartite transportation graph.
///
/// The basis is a spanning tree of `m + n − 1` cells started from the
/// north-west corner rule. Entering cells use Dantzig's most negative reduced
/// cost with ties broken lexicographically; after a run of degenerate pivots
/// the rule falls back to Bland's (first negative cell) so the method cannot
/// cycle. Leaving cells are the lexicographically least among the blocking
/// ones.
#[derive(Debug, Clone)]
pub struct NetworkSimplex {
    pub max_iterations: Option<usize>,
}

impl Default for NetworkSimplex {
    fn default() -> Self {
        NetworkSimplex { max_iterations: None }
    }
}

struct Tree {
    m: usize,
    n: usize,
    /// basic cells as flat indices `i * n + j`
    cells: Vec<usize>,
    flow: Vec<f64>,
    is_basic: Vec<bool>,
}

impl Tree {
    fn north_west(m: usize, n: usize, supply: &[f64], demand: &[f64]) -> Tree {
        let mut a = supply.to_vec();
        let mut b = demand.to_vec();
        let mut cells = Vec::with_capacity(m + n - 1);
        let mut flow = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = a[i].min(b[j]);
            cells.push(i * n + j);
            flow.push(x.max(0.0));
            a[i] -= x;
            b[j] -= x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if (a[i] <= 0.0 && i < m - 1) || j == n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(cells.len(), m + n - 1);
        let mut is_basic = vec![false; m * n];
        for &c in &cells {
            is_basic[c] = true;
        }
        Tree { m, n, cells, flow, is_basic }
    }

    /// Adjacency lists over nodes `0..m` (rows) and `m..m+n` (columns);
    /// entries are `(neighbour, basis slot)`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (slot, &c) in self.cells.iter().enumerate() {
            let (i, j) = (c / self.n, c % self.n);
            adj[i].push((self.m + j, slot));
            adj[self.m + j].push((i, slot));
        }
        adj
    }

    fn potentials(&self, adj: &[Vec<(usize, usize)>], cost: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let (m, n) = (self.m, self.n);
        let mut pot = vec![f64::NAN; m + n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        let mut seen = 1;
        while let Some(node) = queue.pop_front() {
            for &(next, slot) in &adj[node] {
                if pot[next].is_nan() {
                    let c = cost[self.cells[slot]];
                    pot[next] = c - pot[node];
                    seen += 1;
                    queue.push_back(next);
                }
            }
        }
        if seen != m + n {
            return None;
        }
        let v = pot.split_off(m);
        Some((pot, v))
    }

    /// Basis slots on the tree path from column node `m + j` to row node `i`.
    fn path(&self, adj: &[Vec<(usize, usize)>], i: usize, j: usize) -> Vec<usize> {
        let total = self.m + self.n;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; total];
        let mut visited = vec![false; total];
        visited[i] = true;
        let mut queue = VecDeque::from([i]);
        let target = self.m + j;
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &(next, slot) in &adj[node] {
                if !visited[next] {
                    visited[next] = true;
                    parent[next] = Some((node, slot));
                    queue.push_back(next);
                }
            }
        }
        let mut out = Vec::new();
        let mut node = target;
        while node != i {
            let (prev, slot) = parent[node].expect("tree is connected");
            out.push(slot);
            node = prev;
        }
        out
    }
}

impl TransportSolver for NetworkSimplex {
    fn name(&self) -> &'static str {
        "network-simplex"
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
        let cost = &red.cost;
        let scale = cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        let eps = 1e-12 * scale;
        let max_iter = self.max_iterations.unwrap_or(1000 + 50 * (m + n) * (m + n));
        let bland_after = 4 * (m + n);

        let mut tree = Tree::north_west(m, n, &red.supply, &red.demand);
        let mut degenerate_run = 0usize;
        let mut iterations = 0usize;

        let (u, v) = loop {
            let adj = tree.adjacency();
            let (u, v) = tree
                .potentials(&adj, cost)
                .ok_or_else(|| GibbsError::SolverFailure("basis is not a spanning tree".into()))?;

            let bland = degenerate_run > bland_after;
            let mut entering: Option<(usize, f64)> = None;
            'scan: for i in 0..m {
                for j in 0..n {
                    let c = i * n + j;
                    if tree.is_basic[c] {
                        continue;
                    }
                    let r = cost[c] - u[i] - v[j];
                    if r < -eps && entering.map_or(true, |(_, best)| r < best) {
                        entering = Some((c, r));
                        if bland {
                            break 'scan;
                        }
                    }
                }
            }
            let Some((enter, _)) = entering else {
                break (u, v);
            };
            iterations += 1;
            if iterations > max_iter {
                return Err(GibbsError::SolverFailure(format!(
                    "network simplex hit the iteration cap ({max_iter})"
                )));
            }

            let (ei, ej) = (enter / n, enter % n);
            let path = tree.path(&adj, ei, ej);
            // path[0] touches column ej and loses flow; signs alternate from there
            let mut leave: Option<usize> = None;
            for (k, &slot) in path.iter().enumerate() {
                if k % 2 == 0 {
                    let better = match leave {
                        None => true,
                        Some(cur) => {
                            tree.flow[slot] < tree.flow[cur]
                                || (tree.flow[slot] == tree.flow[cur] && tree.cells[slot] < tree.cells[cur])
                        }
                    };
                    if better {
                        leave = Some(slot);
                    }
                }
            }
            let leave = leave.expect("cycle has a decreasing edge");
            let theta = tree.flow[leave];
            for (k, &slot) in path.iter().enumerate() {
                if k % 2 == 0 {
                    tree.flow[slot] -= theta;
                } else {
                    tree.flow[slot] += theta;
                }
            }
            degenerate_run = if theta > 0.0 { 0 } else { degenerate_run + 1 };
            tree.is_basic[tree.cells[leave]] = false;
            tree.is_basic[enter] = true;
            tree.cells[leave] = enter;
            tree.flow[leave] = theta;
        };

        let mut plan = Vec::new();
        let mut primal = 0.0;
        for (slot, &c) in tree.cells.iter().enumerate() {
            let f = tree.flow[slot].max(0.0);
            if f > 0.0 {
                let (i, j) = (red.rows[c / n], red.cols[c % n]);
                primal += f * problem.c(i, j);
                plan.push((i, j, f));
            }
        }
        plan.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let dual = red.expand_duals(problem, &u, &v);
        let dual_value = problem.dual_objective(&dual.u, &dual.v);
        Ok(TransportSolution {
            plan,
            primal,
            dual: Some(dual),
            dual_value: Some(dual_value),
            iterations,
        })
    }
}
