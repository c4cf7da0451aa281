//! Point and additive Schwarz smoothers.

use alloc::vec::Vec;

use crate::dense::PackedCholesky;
use crate::mesh::{node_patches, DofMap, HpMesh};
use crate::mg::hierarchy::MgLevel;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SmootherKind {
    Jacobi,
    GaussSeidel,
    /// One block per leaf element: all functions whose support intersects it.
    SchwarzElementwise,
    /// One block per base-grid vertex: all functions on the surrounding base elements.
    SchwarzPatchwise,
}

impl SmootherKind {
    pub fn default_omega(self) -> f64 {
        match self {
            SmootherKind::Jacobi | SmootherKind::GaussSeidel => 1.0,
            SmootherKind::SchwarzElementwise => 1.0 / 3.0,
            SmootherKind::SchwarzPatchwise => 1.0 / 6.0,
        }
    }

    pub fn is_schwarz(self) -> bool {
        matches!(self, SmootherKind::SchwarzElementwise | SmootherKind::SchwarzPatchwise)
    }
}

/// Direction of a Gauss-Seidel sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Forward,
    Backward,
}

/// A Schwarz block: level-local unknowns and the Cholesky factor of the
/// corresponding principal submatrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SchwarzBlock {
    pub dofs: Vec<u32>,
    pub factor: PackedCholesky,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Smoother {
    pub kind: SmootherKind,
    pub omega: f64,
    inv_diag: Vec<f64>,
    blocks: Vec<SchwarzBlock>,
}

fn level_index(level: &MgLevel, n_fine: usize) -> Vec<u32> {
    let mut map = alloc::vec![u32::MAX; n_fine];
    for (l, &g) in level.dofs.iter().enumerate() {
        map[g as usize] = l as u32;
    }
    map
}

fn push_functions(dofmap: &DofMap, funcs: impl Iterator<Item = u32>, map: &[u32], out: &mut Vec<u32>) {
    for f in funcs {
        for c in 0..dofmap.n_fields {
            let l = map[dofmap.dof(f, c)];
            if l != u32::MAX {
                out.push(l);
            }
        }
    }
}

fn finish_blocks(mut blocks: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    for b in &mut blocks {
        b.sort_unstable();
        b.dedup();
    }
    blocks.retain(|b| !b.is_empty());
    blocks.sort();
    blocks.dedup();
    blocks
}

/// Level-local index sets of the Schwarz blocks of `kind` on `level`.
pub fn schwarz_blocks(kind: SmootherKind, level: &MgLevel, mesh: &HpMesh, dofmap: &DofMap) -> Vec<Vec<u32>> {
    let map = level_index(level, dofmap.len());
    let mut blocks = Vec::new();
    match kind {
        SmootherKind::SchwarzElementwise => {
            for (base, node) in mesh.leaves() {
                let tree = mesh.tree(base);
                let mut b = Vec::new();
                for n in tree.ancestry(node) {
                    let cell = tree.nodes[n].cell;
                    if cell.depth as usize > level.k_cap {
                        break;
                    }
                    push_functions(dofmap, dofmap.cell_functions(cell).iter().map(|f| f.function), &map, &mut b);
                }
                blocks.push(b);
            }
        }
        SmootherKind::SchwarzPatchwise => {
            for patch in node_patches(&mesh.grid) {
                let mut b = Vec::new();
                for &e in patch.elements.iter().filter(|&&e| mesh.is_included(e)) {
                    for node in &mesh.tree(e).nodes {
                        if node.cell.depth as usize > level.k_cap {
                            continue;
                        }
                        let funcs = dofmap.cell_functions(node.cell).iter().map(|f| f.function);
                        push_functions(dofmap, funcs, &map, &mut b);
                    }
                }
                blocks.push(b);
            }
        }
        SmootherKind::Jacobi | SmootherKind::GaussSeidel => {}
    }
    finish_blocks(blocks)
}

/// Lower triangle of the principal submatrix on `dofs`, packed row by row.
fn packed_block(a: &CsrMatrix, dofs: &[u32], pos: &mut [u32]) -> Vec<f64> {
    for (l, &g) in dofs.iter().enumerate() {
        pos[g as usize] = l as u32;
    }
    let n = dofs.len();
    let mut data = alloc::vec![0.0; n * (n + 1) / 2];
    for (i, &g) in dofs.iter().enumerate() {
        let row = i * (i + 1) / 2;
        let (cols, vals) = a.row(g as usize);
        for (c, v) in cols.iter().zip(vals) {
            let j = pos[*c as usize];
            if j != u32::MAX && (j as usize) <= i {
                data[row + j as usize] = *v;
            }
        }
    }
    for &g in dofs {
        pos[g as usize] = u32::MAX;
    }
    data
}

/// Factorizes the blocks `index_sets` of the level matrix `a`.
pub fn factor_blocks(a: &CsrMatrix, index_sets: Vec<Vec<u32>>) -> Result<Vec<SchwarzBlock>> {
    let mut pos = alloc::vec![u32::MAX; a.nrows()];
    let mut blocks = Vec::with_capacity(index_sets.len());
    for (id, dofs) in index_sets.into_iter().enumerate() {
        let data = packed_block(a, &dofs, &mut pos);
        let factor = PackedCholesky::factor_packed(dofs.len(), data)
            .map_err(|e| Error::SingularBlock { block: id, pivot: e.pivot, value: e.value })?;
        blocks.push(SchwarzBlock { dofs, factor });
    }
    Ok(blocks)
}

impl Smoother {
    /// Builds a smoother of `kind` for `level`; `omega` defaults per kind.
    pub fn build(kind: SmootherKind, omega: Option<f64>, level: &MgLevel, mesh: &HpMesh, dofmap: &DofMap) -> Result<Self> {
        let omega = omega.unwrap_or(kind.default_omega());
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter("relaxation parameter must be positive"));
        }
        let a = &level.matrix;
        let mut inv_diag = Vec::new();
        let mut blocks = Vec::new();
        if kind.is_schwarz() {
            blocks = factor_blocks(a, schwarz_blocks(kind, level, mesh, dofmap))?;
        } else {
            for (i, d) in a.diagonal().into_iter().enumerate() {
                if !(d > 0.0) {
                    return Err(Error::SingularBlock { block: i, pivot: 0, value: d });
                }
                inv_diag.push(1.0 / d);
            }
        }
        Ok(Self { kind, omega, inv_diag, blocks })
    }

    /// Schwarz smoother from explicit blocks (level-local indices).
    pub fn from_blocks(kind: SmootherKind, omega: f64, a: &CsrMatrix, blocks: Vec<Vec<u32>>) -> Result<Self> {
        Ok(Self { kind, omega, inv_diag: Vec::new(), blocks: factor_blocks(a, finish_blocks(blocks))? })
    }

    pub fn blocks(&self) -> &[SchwarzBlock] {
        &self.blocks
    }

    /// `z = M^{-1} r` for the additive kinds (Jacobi and Schwarz), without `omega`.
    /// Gauss-Seidel applies one forward and one backward sweep from zero.
    pub fn apply_inverse(&self, a: &CsrMatrix, r: &[f64], z: &mut [f64]) {
        match self.kind {
            SmootherKind::Jacobi => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
                    *zi = ri * di;
                }
            }
            SmootherKind::GaussSeidel => {
                z.fill(0.0);
                self.gs_sweep(a, r, z, 1.0, Sweep::Forward);
                self.gs_sweep(a, r, z, 1.0, Sweep::Backward);
            }
            _ => {
                z.fill(0.0);
                let mut buf = Vec::new();
                for b in &self.blocks {
                    buf.clear();
                    buf.extend(b.dofs.iter().map(|&i| r[i as usize]));
                    b.factor.solve_in_place(&mut buf);
                    for (&i, v) in b.dofs.iter().zip(&buf) {
                        z[i as usize] += v;
                    }
                }
            }
        }
    }

    fn gs_sweep(&self, a: &CsrMatrix, b: &[f64], x: &mut [f64], omega: f64, sweep: Sweep) {
        let n = a.nrows();
        let relax = |i: usize, x: &mut [f64]| {
            let s = b[i] - a.row_dot(i, x);
            x[i] += omega * s * self.inv_diag[i];
        };
        match sweep {
            Sweep::Forward => (0..n).for_each(|i| relax(i, x)),
            Sweep::Backward => (0..n).rev().for_each(|i| relax(i, x)),
        }
    }

    /// One smoothing step `x += omega M^{-1} (b - A x)`; `sweep` selects the
    /// Gauss-Seidel direction and is ignored otherwise.
    pub fn smooth(&self, a: &CsrMatrix, b: &[f64], x: &mut [f64], sweep: Sweep, work: &mut SmootherWork) {
        if self.kind == SmootherKind::GaussSeidel {
            self.gs_sweep(a, b, x, self.omega, sweep);
            return;
        }
        let n = a.nrows();
        work.r.resize(n, 0.0);
        work.z.resize(n, 0.0);
        a.residual(b, x, &mut work.r);
        self.apply_inverse(a, &work.r, &mut work.z);
        for (xi, zi) in x.iter_mut().zip(&work.z) {
            *xi += self.omega * zi;
        }
    }
}

/// Scratch vectors for [`Smoother::smooth`].
#[derive(Debug, Clone, Default)]
pub struct SmootherWork {
    r: Vec<f64>,
    z: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut d = alloc::vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 2.0;
            if i > 0 {
                d[i * n + i - 1] = -1.0;
                d[(i - 1) * n + i] = -1.0;
            }
        }
        CsrMatrix::from_dense(n, n, &d)
    }

    #[test]
    fn single_block_is_exact() {
        let a = laplace_1d(6);
        let s = Smoother::from_blocks(SmootherKind::SchwarzElementwise, 1.0, &a, alloc::vec![(0..6).collect()]).unwrap();
        let b = [1.0, 0.0, 2.0, -1.0, 0.5, 3.0];
        let mut x = [0.0; 6];
        s.smooth(&a, &b, &mut x, Sweep::Forward, &mut SmootherWork::default());
        let mut r = [0.0; 6];
        a.residual(&b, &x, &mut r);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_residual_keeps_iterate() {
        let a = laplace_1d(5);
        let x0 = [0.3, -0.1, 0.7, 0.2, 0.0];
        let mut b = [0.0; 5];
        a.mul_vec(&x0, &mut b);
        let s = Smoother::from_blocks(SmootherKind::SchwarzPatchwise, 1.0 / 6.0, &a, alloc::vec![alloc::vec![0, 1, 2], alloc::vec![2, 3, 4]])
            .unwrap();
        let mut x = x0;
        s.smooth(&a, &b, &mut x, Sweep::Forward, &mut SmootherWork::default());
        for i in 0..5 {
            assert!((x[i] - x0[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn element_blocks_exceed_the_node_overlap() {
        // Periodic 1D Laplacian with blocks {i, i+1}: every unknown lies in two
        // blocks, yet the alternating mode has M^{-1} A v = 8/3 v.
        let n = 8;
        let mut d = alloc::vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 2.0;
            d[i * n + (i + 1) % n] = -1.0;
            d[((i + 1) % n) * n + i] = -1.0;
        }
        let a = CsrMatrix::from_dense(n, n, &d);
        let blocks = (0..n as u32).map(|i| alloc::vec![i, (i + 1) % n as u32]).collect();
        let s = Smoother::from_blocks(SmootherKind::SchwarzElementwise, 1.0, &a, blocks).unwrap();
        let v: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let (mut av, mut z) = (alloc::vec![0.0; n], alloc::vec![0.0; n]);
        a.mul_vec(&v, &mut av);
        s.apply_inverse(&a, &av, &mut z);
        for i in 0..n {
            assert!((z[i] - 8.0 / 3.0 * v[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_block_is_reported() {
        let a = CsrMatrix::from_dense(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let e = Smoother::from_blocks(SmootherKind::SchwarzElementwise, 1.0, &a, alloc::vec![alloc::vec![0, 1]]).unwrap_err();
        assert!(matches!(e, Error::SingularBlock { block: 0, pivot: 1, .. }));
    }
}
