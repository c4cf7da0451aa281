//! V-cycles and the stand-alone multigrid iteration.

use alloc::vec::Vec;

use crate::dense::norm2;
use crate::mesh::{DofMap, HpMesh};
use crate::mg::coarse::{CoarseSolver, CoarseSolverKind};
use crate::mg::hierarchy::LevelHierarchy;
use crate::mg::report::{is_diverging, SolveReport};
use crate::mg::smoother::{Smoother, SmootherKind, SmootherWork, Sweep};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    pub smoother: SmootherKind,
    /// `None` selects the default for the smoother kind.
    pub omega: Option<f64>,
    pub pre_steps: usize,
    pub post_steps: usize,
    /// Gauss-Seidel post-smoothing sweeps backward, making the cycle a
    /// symmetric operator (needed inside CG).
    pub symmetric: bool,
    pub coarse: CoarseSolverKind,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            smoother: SmootherKind::SchwarzPatchwise,
            omega: None,
            pre_steps: 5,
            post_steps: 5,
            symmetric: true,
            coarse: CoarseSolverKind::Direct,
        }
    }
}

/// Level hierarchy plus per-level smoothers and the coarse solver.
#[derive(Debug, Clone)]
pub struct Multigrid {
    pub hierarchy: LevelHierarchy,
    /// One smoother per level above the coarsest (`smoothers[l - 1]` for level `l`).
    pub smoothers: Vec<Smoother>,
    pub coarse: CoarseSolver,
    pub config: CycleConfig,
}

/// Builds the smoothers of every level above the coarsest.
pub fn build_smoothers(hierarchy: &LevelHierarchy, config: &CycleConfig, mesh: &HpMesh, dofmap: &DofMap) -> Result<Vec<Smoother>> {
    hierarchy.levels[1..]
        .iter()
        .map(|level| Smoother::build(config.smoother, config.omega, level, mesh, dofmap))
        .collect()
}

impl Multigrid {
    pub fn new(hierarchy: LevelHierarchy, smoothers: Vec<Smoother>, coarse: CoarseSolver, config: CycleConfig) -> Result<Self> {
        if smoothers.len() + 1 != hierarchy.len() {
            return Err(Error::DimensionMismatch { expected: hierarchy.len() - 1, found: smoothers.len() });
        }
        if config.pre_steps + config.post_steps == 0 {
            return Err(Error::InvalidParameter("at least one smoothing step is required"));
        }
        Ok(Self { hierarchy, smoothers, coarse, config })
    }

    /// Builds hierarchy, smoothers and coarse solver in one go.
    pub fn setup(mesh: &HpMesh, dofmap: &DofMap, a: &CsrMatrix, config: CycleConfig) -> Result<Self> {
        let hierarchy = LevelHierarchy::build(dofmap, a)?;
        let smoothers = build_smoothers(&hierarchy, &config, mesh, dofmap)?;
        let coarse = CoarseSolver::build(config.coarse, &hierarchy.levels[0], mesh, dofmap)?;
        Self::new(hierarchy, smoothers, coarse, config)
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.hierarchy.finest().matrix
    }

    /// One V-cycle for `A e = r` on the finest level, starting from `e = 0`.
    pub fn v_cycle(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut work = SmootherWork::default();
        self.cycle(self.hierarchy.len() - 1, r, &mut work)
    }

    fn cycle(&self, l: usize, b: &[f64], work: &mut SmootherWork) -> Result<Vec<f64>> {
        let level = &self.hierarchy.levels[l];
        if l == 0 {
            return self.coarse.solve(&level.matrix, b);
        }
        let a = &level.matrix;
        let smoother = &self.smoothers[l - 1];
        let mut x = alloc::vec![0.0; level.len()];
        for _ in 0..self.config.pre_steps {
            smoother.smooth(a, b, &mut x, Sweep::Forward, work);
        }
        let mut r = alloc::vec![0.0; level.len()];
        a.residual(b, &x, &mut r);
        let rc = self.hierarchy.restrict(l - 1, &r);
        let ec = self.cycle(l - 1, &rc, work)?;
        self.hierarchy.prolongate_add(l - 1, &ec, &mut x);
        let post = if self.config.symmetric { Sweep::Backward } else { Sweep::Forward };
        for _ in 0..self.config.post_steps {
            smoother.smooth(a, b, &mut x, post, work);
        }
        Ok(x)
    }

    /// Stand-alone iteration `x += V(b - A x)` from `x = 0` until the
    /// relative residual drops below `tol`, `max_it` cycles were applied,
    /// or divergence is detected.
    pub fn solve(&self, b: &[f64], tol: f64, max_it: usize) -> Result<(Vec<f64>, SolveReport)> {
        let a = self.matrix();
        let n = a.nrows();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        let mut x = alloc::vec![0.0; n];
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok((x, SolveReport::from_history(alloc::vec![0.0], true, false)));
        }
        let mut r = b.to_vec();
        let mut history = alloc::vec![1.0];
        let (mut converged, mut diverged) = (false, false);
        for _ in 0..max_it {
            let e = self.v_cycle(&r)?;
            for (xi, ei) in x.iter_mut().zip(&e) {
                *xi += ei;
            }
            a.residual(b, &x, &mut r);
            let rel = norm2(&r) / bnorm;
            history.push(rel);
            if rel < tol {
                converged = true;
                break;
            }
            if is_diverging(&history) {
                diverged = true;
                break;
            }
        }
        Ok((x, SolveReport::from_history(history, converged, diverged)))
    }
}
