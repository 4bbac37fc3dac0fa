use std::collections::HashMap;

use super::grid::SpinGrid;
use super::system::AdmissibilitySystem;
use crate::error::{GibbsError, Result};

/// Default cap on the number of words in a single table.
pub const DEFAULT_WORD_BUDGET: usize = 1 << 20;

/// All admissible words of one fixed length, in lexicographic order.
#[derive(Debug, Clone)]
pub struct AdmissibleWordTable {
    depth: usize,
    letters: Vec<u32>,
    index: HashMap<Box<[u32]>, usize>,
    /// Index of `w_1 .. w_{k-1}` in the table one level down.
    prefix: Vec<usize>,
    /// Index of `w_2 .. w_k` in the table one level down.
    tail: Vec<usize>,
}

impl AdmissibleWordTable {
    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.letters.len() / self.depth
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    #[inline]
    pub fn word(&self, i: usize) -> &[u32] {
        &self.letters[i * self.depth..(i + 1) * self.depth]
    }

    pub fn words(&self) -> impl Iterator<Item = &[u32]> {
        self.letters.chunks_exact(self.depth)
    }

    pub fn index_of(&self, word: &[u32]) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Position of the word with its last letter dropped (depth >= 2).
    #[inline]
    pub fn prefix_index(&self, i: usize) -> usize {
        self.prefix[i]
    }

    /// Position of the shifted word `w_2 .. w_k` (depth >= 2).
    #[inline]
    pub fn tail_index(&self, i: usize) -> usize {
        self.tail[i]
    }

    #[inline]
    pub fn first_letter(&self, i: usize) -> usize {
        self.letters[i * self.depth] as usize
    }
}

/// Number of admissible words at each depth `1..=k`, computed without
/// materializing them.
pub fn projected_word_counts(sys: &AdmissibilitySystem, k: usize) -> Vec<u128> {
    let n = sys.alphabet_size();
    let mut by_last = vec![1u128; n];
    let mut counts = Vec::with_capacity(k);
    for depth in 1..=k {
        if depth > 1 {
            let mut next = vec![0u128; n];
            for (c, slot) in next.iter_mut().enumerate() {
                for (b, &cnt) in by_last.iter().enumerate() {
                    if sys.allows(b, c) {
                        *slot = slot.saturating_add(cnt);
                    }
                }
            }
            by_last = next;
        }
        counts.push(by_last.iter().fold(0u128, |acc, &c| acc.saturating_add(c)));
    }
    counts
}

/// Exhaustive, duplicate-free list of admissible `k`-words.
pub fn enumerate_words(sys: &AdmissibilitySystem, k: usize, budget: usize) -> Result<AdmissibleWordTable> {
    let tables = enumerate_up_to(sys, k, budget)?;
    Ok(tables.into_iter().last().expect("k >= 1"))
}

fn enumerate_up_to(sys: &AdmissibilitySystem, k: usize, budget: usize) -> Result<Vec<AdmissibleWordTable>> {
    if k == 0 {
        return Err(GibbsError::InvalidArgument("word depth must be at least 1".into()));
    }
    let counts = projected_word_counts(sys, k);
    for (d, &count) in counts.iter().enumerate() {
        if count > budget as u128 {
            return Err(GibbsError::DepthOverflow { depth: d + 1, count, budget });
        }
    }
    let n = sys.alphabet_size();
    let mut tables: Vec<AdmissibleWordTable> = Vec::with_capacity(k);
    tables.push(build_table(1, (0..n as u32).collect(), None));
    for depth in 2..=k {
        let prev = &tables[depth - 2];
        let mut letters = Vec::with_capacity(counts[depth - 1] as usize * depth);
        for w in prev.words() {
            let last = *w.last().unwrap() as usize;
            for c in 0..n {
                if sys.allows(last, c) {
                    letters.extend_from_slice(w);
                    letters.push(c as u32);
                }
            }
        }
        let table = build_table(depth, letters, Some(prev));
        tables.push(table);
    }
    Ok(tables)
}

fn build_table(depth: usize, letters: Vec<u32>, lower: Option<&AdmissibleWordTable>) -> AdmissibleWordTable {
    let count = letters.len() / depth;
    let mut index = HashMap::with_capacity(count);
    for (i, w) in letters.chunks_exact(depth).enumerate() {
        index.insert(w.to_vec().into_boxed_slice(), i);
    }
    let (prefix, tail) = match lower {
        Some(lower) => letters
            .chunks_exact(depth)
            .map(|w| {
                (
                    lower.index_of(&w[..depth - 1]).expect("prefix of admissible word is admissible"),
                    lower.index_of(&w[1..]).expect("tail of admissible word is admissible"),
                )
            })
            .unzip(),
        None => (Vec::new(), Vec::new()),
    };
    AdmissibleWordTable { depth, letters, index, prefix, tail }
}

/// Grid, admissibility system and word tables for depths `1..=max_depth`.
///
/// Everything downstream indexes functions and measures by these tables.
#[derive(Debug, Clone)]
pub struct WordSpace {
    grid: SpinGrid,
    system: AdmissibilitySystem,
    tables: Vec<AdmissibleWordTable>,
    /// `front_ext[d][j]`: for word `j` of depth `d + 1`, the pairs
    /// `(a, index of a·w at depth d + 2)` over `a ∈ s(w_1)`.
    front_ext: Vec<Vec<Vec<(usize, usize)>>>,
}

impl WordSpace {
    pub fn new(grid: SpinGrid, system: AdmissibilitySystem, max_depth: usize) -> Result<Self> {
        Self::with_budget(grid, system, max_depth, DEFAULT_WORD_BUDGET)
    }

    pub fn with_budget(grid: SpinGrid, system: AdmissibilitySystem, max_depth: usize, budget: usize) -> Result<Self> {
        if grid.len() != system.alphabet_size() {
            return Err(GibbsError::InvalidSystem("grid and system sizes differ".into()));
        }
        let tables = enumerate_up_to(&system, max_depth, budget)?;
        let mut front_ext = Vec::with_capacity(max_depth.saturating_sub(1));
        for d in 1..max_depth {
            let lower = &tables[d - 1];
            let upper = &tables[d];
            let ext: Vec<Vec<(usize, usize)>> = (0..lower.len())
                .map(|j| {
                    let w = lower.word(j);
                    let mut buf = Vec::with_capacity(d + 1);
                    system
                        .predecessors(w[0] as usize)
                        .iter()
                        .map(|&a| {
                            buf.clear();
                            buf.push(a as u32);
                            buf.extend_from_slice(w);
                            (a, upper.index_of(&buf).expect("a ∈ s(w_1) keeps a·w admissible"))
                        })
                        .collect()
                })
                .collect();
            front_ext.push(ext);
        }
        Ok(WordSpace { grid, system, tables, front_ext })
    }

    #[inline]
    pub fn grid(&self) -> &SpinGrid {
        &self.grid
    }

    #[inline]
    pub fn system(&self) -> &AdmissibilitySystem {
        &self.system
    }

    #[inline]
    pub fn max_depth(&self) -> usize {
        self.tables.len()
    }

    /// Word table of the given depth (1-based).
    pub fn table(&self, depth: usize) -> &AdmissibleWordTable {
        &self.tables[depth - 1]
    }

    pub fn check_depth(&self, depth: usize) -> Result<()> {
        if depth == 0 || depth > self.max_depth() {
            Err(GibbsError::DepthMismatch { required: depth.max(1), available: self.max_depth() })
        } else {
            Ok(())
        }
    }

    /// Front extensions `a·w` of word `j` at `depth`; results live at `depth + 1`.
    #[inline]
    pub fn front_extensions(&self, depth: usize, j: usize) -> &[(usize, usize)] {
        &self.front_ext[depth - 1][j]
    }

    /// Maps every word of `from` depth to the index of its length-`to` prefix.
    pub fn prefix_map(&self, from: usize, to: usize) -> Vec<usize> {
        assert!(to >= 1 && to <= from);
        let mut map: Vec<usize> = (0..self.table(from).len()).collect();
        for d in ((to + 1)..=from).rev() {
            let t = self.table(d);
            for slot in map.iter_mut() {
                *slot = t.prefix_index(*slot);
            }
        }
        map
    }

    /// Maps every word of `from` depth to the index of `w_{shift+1} .. w_{shift+len}`.
    pub fn window_map(&self, from: usize, shift: usize, len: usize) -> Vec<usize> {
        assert!(len >= 1 && shift + len <= from);
        let mut map: Vec<usize> = (0..self.table(from).len()).collect();
        let mut d = from;
        for _ in 0..shift {
            let t = self.table(d);
            for slot in map.iter_mut() {
                *slot = t.tail_index(*slot);
            }
            d -= 1;
        }
        let prefix = self.prefix_map(d, len);
        map.iter().map(|&i| prefix[i]).collect()
    }
}
