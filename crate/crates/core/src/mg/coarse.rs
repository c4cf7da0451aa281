//! Coarse-level solvers.

use alloc::vec::Vec;

use crate::dense::dot;
use crate::mesh::{DofMap, HpMesh};
use crate::mg::hierarchy::MgLevel;
use crate::mg::krylov::{pcg, Preconditioner};
use crate::mg::smoother::{Smoother, SmootherKind};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Envelope (skyline) Cholesky factor: row `i` stores `L[i][first[i]..=i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkylineCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let mut first = Vec::with_capacity(n);
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            let (cols, _) = a.row(i);
            let f = cols.first().map_or(i, |&c| (c as usize).min(i));
            first.push(f);
            start.push(start[i] + i - f + 1);
        }
        let mut data = alloc::vec![0.0; start[n]];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (c, v) in cols.iter().zip(vals) {
                let c = *c as usize;
                if c <= i {
                    data[start[i] + c - first[i]] = *v;
                }
            }
        }
        for i in 0..n {
            let (fi, si) = (first[i], start[i]);
            for j in fi..=i {
                let (fj, sj) = (first[j], start[j]);
                let lo = fi.max(fj);
                let s = dot(&data[si + lo - fi..si + j - fi], &data[sj + lo - fj..sj + j - fj]);
                let v = data[si + j - fi] - s;
                if j == i {
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::SingularCoarse { pivot: i, value: v });
                    }
                    data[si + i - fi] = libm::sqrt(v);
                } else {
                    data[si + j - fi] = v / data[sj + j - fj];
                }
            }
        }
        Ok(Self { first, start, data })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn stored(&self) -> usize {
        self.data.len()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let (fi, si) = (self.first[i], self.start[i]);
            let s = dot(&self.data[si..si + i - fi], &x[fi..i]);
            x[i] = (x[i] - s) / self.data[si + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            x[i] /= self.data[si + i - fi];
            let xi = x[i];
            for (xj, l) in x[fi..i].iter_mut().zip(&self.data[si..si + i - fi]) {
                *xj -= l * xi;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseSolverKind {
    /// Envelope Cholesky factorization.
    Direct,
    /// Conjugate gradients preconditioned by elementwise additive Schwarz.
    InnerCg,
}

/// Relative tolerance of the inner CG coarse solve.
pub const INNER_CG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum CoarseSolver {
    Direct(SkylineCholesky),
    InnerCg { schwarz: Smoother, max_it: usize },
}

impl CoarseSolver {
    pub fn build(kind: CoarseSolverKind, level: &MgLevel, mesh: &HpMesh, dofmap: &DofMap) -> Result<Self> {
        match kind {
            CoarseSolverKind::Direct => Ok(CoarseSolver::Direct(SkylineCholesky::factor(&level.matrix)?)),
            CoarseSolverKind::InnerCg => {
                let schwarz = Smoother::build(SmootherKind::SchwarzElementwise, Some(1.0), level, mesh, dofmap)?;
                Ok(CoarseSolver::InnerCg { schwarz, max_it: 10 * level.len() + 100 })
            }
        }
    }

    pub fn kind(&self) -> CoarseSolverKind {
        match self {
            CoarseSolver::Direct(_) => CoarseSolverKind::Direct,
            CoarseSolver::InnerCg { .. } => CoarseSolverKind::InnerCg,
        }
    }

    /// Solves `A x = b` on the coarse level.
    pub fn solve(&self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            CoarseSolver::Direct(f) => {
                let mut x = b.to_vec();
                f.solve_in_place(&mut x);
                Ok(x)
            }
            CoarseSolver::InnerCg { schwarz, max_it } => {
                let (x, report) = pcg(a, b, &Preconditioner::Smoother(schwarz), INNER_CG_TOL, *max_it)?;
                if !report.converged {
                    return Err(Error::SingularCoarse { pivot: 0, value: report.final_residual() });
                }
                Ok(x)
            }
        }
    }
}
