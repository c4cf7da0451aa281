//! Multigrid levels obtained by trimming the hierarchical unknowns.

use alloc::vec::Vec;

use crate::mesh::DofMap;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// One multigrid level: the unknowns with order `<= p_cap` and depth
/// `<= k_cap`, and the principal submatrix of the fine matrix on them.
#[derive(Debug, Clone, PartialEq)]
pub struct MgLevel {
    pub p_cap: usize,
    pub k_cap: usize,
    /// Sorted indices into the fine system.
    pub dofs: Vec<u32>,
    pub matrix: CsrMatrix,
    /// Positions of this level's unknowns within the next finer level
    /// (empty on the finest level).
    pub in_finer: Vec<u32>,
}

impl MgLevel {
    /// The level holding every unknown of `dofmap` (a single-level method).
    pub fn full(dofmap: &DofMap, a: &CsrMatrix) -> Self {
        Self {
            p_cap: dofmap.p,
            k_cap: dofmap.max_depth(),
            dofs: (0..a.nrows() as u32).collect(),
            matrix: a.clone(),
            in_finer: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }
}

/// Levels ordered from coarsest (`levels[0]`) to finest.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelHierarchy {
    pub levels: Vec<MgLevel>,
}

/// `(p, k), (p-1, k), ..., (1, k), (1, k-1), ..., (1, 0)`, finest first.
pub fn level_sequence(p: usize, k: usize) -> Vec<(usize, usize)> {
    let mut seq: Vec<(usize, usize)> = (1..=p).rev().map(|q| (q, k)).collect();
    seq.extend((0..k).rev().map(|d| (1, d)));
    seq
}

impl LevelHierarchy {
    /// Builds the level chain for the fine matrix `a` numbered by `dofmap`.
    /// Levels that would repeat the next finer index set are skipped, except
    /// that the coarsest level always keeps the label `(1, 0)`.
    pub fn build(dofmap: &DofMap, a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != dofmap.len() {
            return Err(Error::DimensionMismatch { expected: dofmap.len(), found: a.nrows() });
        }
        let p = dofmap.p;
        let k = dofmap.max_depth();
        let mut fine_first: Vec<MgLevel> = Vec::new();
        for (p_cap, k_cap) in level_sequence(p, k) {
            let dofs = dofmap.trimmed(p_cap, k_cap);
            if dofs.is_empty() {
                return Err(Error::EmptyLevel { p: p_cap, k: k_cap });
            }
            match fine_first.last_mut() {
                None => {
                    fine_first.push(MgLevel { p_cap, k_cap, matrix: a.clone(), dofs, in_finer: Vec::new() });
                }
                // Nested sets of equal size are identical.
                Some(finer) if finer.dofs.len() == dofs.len() => {
                    if (p_cap, k_cap) == (1, 0) {
                        (finer.p_cap, finer.k_cap) = (1, 0);
                    }
                }
                Some(finer) => {
                    let in_finer = positions(&finer.dofs, &dofs);
                    let matrix = finer.matrix.principal_submatrix(&in_finer);
                    fine_first.push(MgLevel { p_cap, k_cap, dofs, matrix, in_finer });
                }
            }
        }
        // `in_finer` was recorded on the coarser level of each pair.
        fine_first.reverse();
        Ok(Self { levels: fine_first })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn finest(&self) -> &MgLevel {
        self.levels.last().unwrap()
    }

    /// Gathers the unknowns of level `to` from a vector on level `to + 1`.
    pub fn restrict(&self, to: usize, fine: &[f64]) -> Vec<f64> {
        self.levels[to].in_finer.iter().map(|&i| fine[i as usize]).collect()
    }

    /// Adds a level-`from` vector into a vector on level `from + 1`.
    pub fn prolongate_add(&self, from: usize, coarse: &[f64], fine: &mut [f64]) {
        for (&i, &v) in self.levels[from].in_finer.iter().zip(coarse) {
            fine[i as usize] += v;
        }
    }

    /// Scatter into a zero vector on level `from + 1`.
    pub fn prolongate(&self, from: usize, coarse: &[f64]) -> Vec<f64> {
        let mut fine = alloc::vec![0.0; self.levels[from + 1].len()];
        self.prolongate_add(from, coarse, &mut fine);
        fine
    }
}

/// Positions of the sorted `subset` within the sorted `set`.
fn positions(set: &[u32], subset: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(subset.len());
    let mut j = 0usize;
    for &s in subset {
        while set[j] < s {
            j += 1;
        }
        debug_assert_eq!(set[j], s);
        out.push(j as u32);
    }
    out
}
