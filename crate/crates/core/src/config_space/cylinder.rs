use serde::{Deserialize, Serialize};

/// `Π_m^{-1}(B_1 × … × B_m)` with each `B_j` a set of grid indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderSet {
    coordinate_sets: Vec<Vec<usize>>,
}

impl CylinderSet {
    pub fn new(mut coordinate_sets: Vec<Vec<usize>>) -> Self {
        for set in coordinate_sets.iter_mut() {
            set.sort_unstable();
            set.dedup();
        }
        CylinderSet { coordinate_sets }
    }

    /// The cylinder `[w_1 … w_m]` of a single word.
    pub fn of_word(word: &[u32]) -> Self {
        CylinderSet {
            coordinate_sets: word.iter().map(|&a| vec![a as usize]).collect(),
        }
    }

    /// Every coordinate unrestricted over an alphabet of size `n`.
    pub fn full(depth: usize, n: usize) -> Self {
        CylinderSet { coordinate_sets: vec![(0..n).collect(); depth] }
    }

    pub fn depth(&self) -> usize {
        self.coordinate_sets.len()
    }

    pub fn coordinate_sets(&self) -> &[Vec<usize>] {
        &self.coordinate_sets
    }

    /// Whether a word (or point prefix) of length `>= depth` lies in the cylinder.
    pub fn contains(&self, word: &[u32]) -> bool {
        word.len() >= self.depth()
            && self
                .coordinate_sets
                .iter()
                .zip(word)
                .all(|(set, &a)| set.binary_search(&(a as usize)).is_ok())
    }
}
