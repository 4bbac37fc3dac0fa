use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::grid::SpinGrid;
use crate::error::{GibbsError, Result};

/// Closed-interval membership tolerance.
pub const INTERVAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo - INTERVAL_TOL && v <= self.hi + INTERVAL_TOL
    }
}

/// The compact constraint set, as a finite union of closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    intervals: Vec<Interval>,
}

impl ConstraintSet {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(GibbsError::EmptyConstraintSet);
        }
        for iv in &intervals {
            if !(iv.lo.is_finite() && iv.hi.is_finite()) || iv.lo > iv.hi {
                return Err(GibbsError::InvalidSystem(format!(
                    "malformed interval [{}, {}]",
                    iv.lo, iv.hi
                )));
            }
        }
        Ok(ConstraintSet { intervals })
    }

    pub fn contains(&self, v: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(v))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }
}

/// The pair `(A, I)` tabulated on a grid.
///
/// A sequence is admissible when `A(x_n, x_{n+1}) ∈ I` for all `n`, so a
/// letter `a` may be placed in front of `b` exactly when `a ∈ s(b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilitySystem {
    n: usize,
    a_values: Vec<f64>,
    constraint: ConstraintSet,
    allowed: Vec<bool>,
    predecessors: Vec<Vec<usize>>,
    blocks: Vec<Range<usize>>,
}

impl AdmissibilitySystem {
    /// Tabulates `s(b) = {a : A(a, b) ∈ I}` and the locally constant
    /// partition of the grid.
    pub fn build(grid: &SpinGrid, a_values: Vec<f64>, constraint: ConstraintSet) -> Result<Self> {
        let n = grid.len();
        if a_values.len() != n * n {
            return Err(GibbsError::InvalidSystem(format!(
                "A has {} entries, grid needs {}",
                a_values.len(),
                n * n
            )));
        }
        if a_values.iter().any(|v| !v.is_finite()) {
            return Err(GibbsError::InvalidSystem("A has non-finite entries".into()));
        }
        let allowed: Vec<bool> = a_values.iter().map(|&v| constraint.contains(v)).collect();
        if !allowed.iter().any(|&ok| ok) {
            return Err(GibbsError::EmptySystem);
        }
        let predecessors: Vec<Vec<usize>> = (0..n)
            .map(|b| (0..n).filter(|&a| allowed[a * n + b]).collect())
            .collect();
        for (b, s) in predecessors.iter().enumerate() {
            if s.is_empty() {
                return Err(GibbsError::InvalidSystem(format!("s({b}) is empty")));
            }
            let mass: f64 = s.iter().map(|&a| grid.nu(a)).sum();
            if mass <= 0.0 {
                return Err(GibbsError::InvalidSystem(format!("nu(s({b})) = 0")));
            }
        }

        let mut blocks = Vec::new();
        let mut start = 0;
        for b in 1..=n {
            if b == n || predecessors[b] != predecessors[start] {
                blocks.push(start..b);
                start = b;
            }
        }

        Ok(AdmissibilitySystem {
            n,
            a_values,
            constraint,
            allowed,
            predecessors,
            blocks,
        })
    }

    /// Like [`build`](Self::build), additionally requiring that grid points
    /// closer than `radius` share the same set `s(b)`.
    pub fn build_with_locality(
        grid: &SpinGrid,
        a_values: Vec<f64>,
        constraint: ConstraintSet,
        radius: f64,
    ) -> Result<Self> {
        let sys = Self::build(grid, a_values, constraint)?;
        let pairs = sys.locality_violations(grid, radius);
        if pairs.is_empty() {
            Ok(sys)
        } else {
            Err(GibbsError::LocalConstancy { pairs })
        }
    }

    /// Pairs `b < b'` with `d(b, b') < radius` but `s(b) != s(b')`.
    pub fn locality_violations(&self, grid: &SpinGrid, radius: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for b in 0..self.n {
            for c in (b + 1)..self.n {
                if grid.d(b, c) < radius && self.predecessors[b] != self.predecessors[c] {
                    out.push((b, c));
                }
            }
        }
        out
    }

    #[inline]
    pub fn alphabet_size(&self) -> usize {
        self.n
    }

    /// Whether `a` may directly precede `b`.
    #[inline]
    pub fn allows(&self, a: usize, b: usize) -> bool {
        self.allowed[a * self.n + b]
    }

    /// The set `s(b)` of letters that may be prepended to a sequence starting with `b`.
    #[inline]
    pub fn predecessors(&self, b: usize) -> &[usize] {
        &self.predecessors[b]
    }

    /// Letters that may follow `a`.
    pub fn successors(&self, a: usize) -> Vec<usize> {
        (0..self.n).filter(|&b| self.allows(a, b)).collect()
    }

    pub fn a_value(&self, a: usize, b: usize) -> f64 {
        self.a_values[a * self.n + b]
    }

    pub fn constraint(&self) -> &ConstraintSet {
        &self.constraint
    }

    /// Maximal runs of grid indices on which `b ↦ s(b)` is constant.
    pub fn partition_blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, b: usize) -> usize {
        self.blocks
            .iter()
            .position(|r| r.contains(&b))
            .expect("blocks cover the grid")
    }

    /// Letters from which admissible sequences continue forever; words
    /// ending elsewhere have no infinite admissible extension.
    pub fn forward_viable(&self) -> Vec<bool> {
        let mut viable = vec![true; self.n];
        loop {
            let mut changed = false;
            for a in 0..self.n {
                if viable[a] && !(0..self.n).any(|b| viable[b] && self.allows(a, b)) {
                    viable[a] = false;
                    changed = true;
                }
            }
            if !changed {
                return viable;
            }
        }
    }
}
