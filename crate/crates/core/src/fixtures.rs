//! Small reference systems with closed-form answers.

use crate::config_space::{AdmissibilitySystem, ConstraintSet, Interval, SpinGrid, WordSpace};
use crate::transfer::DepthKFunction;

fn build(grid: SpinGrid, a: impl Fn(f64, f64) -> f64, intervals: Vec<Interval>) -> (SpinGrid, AdmissibilitySystem) {
    let pts = grid.points().to_vec();
    let a_values = pts.iter().flat_map(|&x| pts.iter().map(move |&y| (x, y))).map(|(x, y)| a(x, y)).collect();
    let sys = AdmissibilitySystem::build(&grid, a_values, ConstraintSet::new(intervals).expect("nonempty"))
        .expect("reference system is valid");
    (grid, sys)
}

/// Two symbols, `A(a, b) = a·b`, `I = {0}`: the word `11` is forbidden.
pub fn golden_mean_system() -> (SpinGrid, AdmissibilitySystem) {
    build(SpinGrid::uniform(2).expect("grid"), |a, b| a * b, vec![Interval::point(0.0)])
}

/// Every transition allowed on a uniform `n`-point grid.
pub fn full_shift_system(n: usize) -> (SpinGrid, AdmissibilitySystem) {
    build(SpinGrid::uniform(n).expect("grid"), |_, _| 0.0, vec![Interval::new(-1.0, 1.0)])
}

/// Two symbols that must alternate: `A(a, b) = |a − b|`, `I = {1}`.
pub fn period_two_system() -> (SpinGrid, AdmissibilitySystem) {
    build(SpinGrid::uniform(2).expect("grid"), |a, b| (a - b).abs(), vec![Interval::point(1.0)])
}

pub fn golden_mean_space(depth: usize) -> WordSpace {
    let (g, s) = golden_mean_system();
    WordSpace::new(g, s, depth).expect("small space")
}

pub fn full_shift_space(n: usize, depth: usize) -> WordSpace {
    let (g, s) = full_shift_system(n);
    WordSpace::new(g, s, depth).expect("small space")
}

pub fn period_two_space(depth: usize) -> WordSpace {
    let (g, s) = period_two_system();
    WordSpace::new(g, s, depth).expect("small space")
}

/// Depth-1 potential `log(p_a / ν(a))`, normalized for any law `p` on the
/// full shift; its Gibbs state is the product measure with marginal `p`.
pub fn bernoulli_potential(space: &WordSpace, p: &[f64]) -> DepthKFunction {
    let grid = space.grid();
    DepthKFunction::from_fn(space, 1, |w| (p[w[0] as usize] / grid.nu(w[0] as usize)).ln()).expect("depth 1")
}
