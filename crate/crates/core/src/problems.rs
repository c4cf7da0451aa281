//! Benchmark problems and a solver driver.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::assembly::{
    assemble, BoundaryCondition, LinearSystem, ManufacturedPoisson, Physics, PlaneModel, QuadratureConfig,
};
use crate::basis::Space;
use crate::immersed::{BoundaryKind, CellClass, Circle, ImplicitDomain};
use crate::mesh::{BaseGrid, DofMap, HpMesh, Rect};
use crate::mg::{
    pcg, CoarseSolver, CycleConfig, LevelHierarchy, Multigrid, PhaseTimings, Preconditioner, Smoother, SmootherKind,
    SolveReport,
};
use crate::mg::hierarchy::MgLevel;
use crate::{Error, Result};

/// Everything needed to solve one benchmark instance.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: HpMesh,
    pub dofmap: DofMap,
    pub domain: ImplicitDomain,
    pub physics: Physics,
    pub system: LinearSystem,
}

/// How cut elements are refined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    /// Every cut base element gets a uniform tree of depth `k`.
    Uniform,
    /// Cells are bisected recursively while they are cut, down to depth `k`.
    TowardBoundary,
}

fn element_count(extent: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !(extent > 0.0) {
        return Err(Error::InvalidParameter("element size must be positive"));
    }
    Ok(libm::ceil(extent / h - 1e-9).max(1.0) as usize)
}

fn refine(mesh: &mut HpMesh, domain: &ImplicitDomain, refinement: Refinement, k: usize) -> Result<()> {
    if k == 0 {
        return Ok(());
    }
    let cut = |r: &Rect| domain.classify(r, 5) == CellClass::Cut;
    match refinement {
        Refinement::Uniform => mesh.refine_where(cut, k),
        Refinement::TowardBoundary => mesh.refine_toward(cut, k),
    }
}

/// Poisson problem on a unit square rotated by `angle_deg` inside a
/// Cartesian grid, with a manufactured solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedSquareProblem {
    pub angle_deg: f64,
    pub h: f64,
    pub p: usize,
    pub space: Space,
    pub k: usize,
    pub refinement: Refinement,
    pub kappa: f64,
    pub beta: f64,
    pub alpha: f64,
    pub quadrature: QuadratureConfig,
}

impl RotatedSquareProblem {
    /// Constants of the reference study: `kappa = 10`, `beta = 1e4`, `alpha = 1e-8`.
    pub fn new(angle_deg: f64, h: f64, p: usize) -> Self {
        Self {
            angle_deg,
            h,
            p,
            space: Space::TensorProduct,
            k: 0,
            refinement: Refinement::TowardBoundary,
            kappa: 10.0,
            beta: 1e4,
            alpha: 1e-8,
            quadrature: QuadratureConfig::default(),
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle_deg * PI / 180.0
    }

    pub fn manufactured(&self) -> ManufacturedPoisson {
        ManufacturedPoisson::new(self.angle(), [0.0, 0.0], self.kappa)
    }

    /// Background grid centred on the square and just covering it.
    pub fn grid(&self) -> Result<BaseGrid> {
        if !(0.0..=45.0).contains(&self.angle_deg) {
            return Err(Error::InvalidParameter("rotation angle must lie in [0, 45] degrees"));
        }
        let (s, c) = libm::sincos(self.angle());
        let n = element_count(c + s, self.h)?;
        let len = n as f64 * self.h;
        BaseGrid::new([-0.5 * len, -0.5 * len], [len, len], [n, n])
    }

    pub fn domain(&self) -> Result<ImplicitDomain> {
        ImplicitDomain::rotated_square([0.0, 0.0], 1.0, self.angle(), BoundaryKind::Dirichlet, self.alpha)
    }

    pub fn discretize(&self) -> Result<Discretization> {
        let grid = self.grid()?;
        let domain = self.domain()?;
        let mut mesh = HpMesh::new(grid);
        mesh.exclude_where(|r| domain.classify(r, 5) == CellClass::Outside);
        refine(&mut mesh, &domain, self.refinement, self.k)?;
        let physics = Physics::Poisson { kappa: self.kappa };
        let dofmap = DofMap::build(&mesh, self.p, self.space, 1)?;
        let m = self.manufactured();
        let source = move |x: [f64; 2]| [m.source(x), 0.0];
        let g = move |x: [f64; 2]| [m.exact(x), 0.0];
        let bcs = [(BoundaryKind::Dirichlet, BoundaryCondition::DirichletPenalty { g: &g, beta: self.beta })];
        let system = assemble(&mesh, &dofmap, &domain, &physics, Some(&source), &bcs, &self.quadrature)?;
        Ok(Discretization { mesh, dofmap, domain, physics, system })
    }
}

/// Square plate with four circular holes, clamped on the left edge and
/// pulled on the right edge.
#[derive(Debug, Clone, PartialEq)]
pub struct PerforatedPlateProblem {
    pub length: f64,
    pub holes: Vec<Circle>,
    pub h: f64,
    pub p: usize,
    pub space: Space,
    pub k: usize,
    pub refinement: Refinement,
    pub young: f64,
    pub poisson: f64,
    pub model: PlaneModel,
    pub beta: f64,
    pub alpha: f64,
    pub traction: f64,
    pub quadrature: QuadratureConfig,
}

impl PerforatedPlateProblem {
    /// 4 x 4 plate with holes of radius `0.3 sqrt(2)` centred at `(1,1)`,
    /// `(3,1)`, `(1,3)`, `(3,3)`; steel-like material in plane stress.
    pub fn new(h: f64, p: usize, k: usize) -> Self {
        let r = 0.3 * core::f64::consts::SQRT_2;
        let holes = [[1.0, 1.0], [3.0, 1.0], [1.0, 3.0], [3.0, 3.0]]
            .into_iter()
            .map(|center| Circle { center, radius: r })
            .collect();
        Self {
            length: 4.0,
            holes,
            h,
            p,
            space: Space::TensorProduct,
            k,
            refinement: Refinement::TowardBoundary,
            young: 2.069e5,
            poisson: 0.29,
            model: PlaneModel::PlaneStress,
            beta: 1e8,
            alpha: 1e-8,
            traction: 100.0,
            quadrature: QuadratureConfig::default(),
        }
    }

    /// `length / h` elements per direction.
    pub fn grid(&self) -> Result<BaseGrid> {
        let n = element_count(self.length, self.h)?;
        BaseGrid::new([0.0, 0.0], [self.length, self.length], [n, n])
    }

    pub fn domain(&self) -> Result<ImplicitDomain> {
        use BoundaryKind::*;
        let plate = Rect::new([0.0, 0.0], [self.length, self.length]);
        let mut d = ImplicitDomain::rectangle(plate, [Free, Neumann, Free, Dirichlet], self.alpha)?;
        for c in &self.holes {
            d = d.with_hole(*c, Free);
        }
        Ok(d)
    }

    pub fn discretize(&self) -> Result<Discretization> {
        let grid = self.grid()?;
        let domain = self.domain()?;
        let mut mesh = HpMesh::new(grid);
        mesh.exclude_where(|r| domain.classify(r, 5) == CellClass::Outside);
        refine(&mut mesh, &domain, self.refinement, self.k)?;
        let physics = Physics::Elasticity2d { young: self.young, poisson: self.poisson, model: self.model };
        let dofmap = DofMap::build(&mesh, self.p, self.space, 2)?;
        let zero = |_: [f64; 2]| [0.0, 0.0];
        let t = self.traction;
        let pull = move |_: [f64; 2]| [t, 0.0];
        let bcs = [
            (BoundaryKind::Dirichlet, BoundaryCondition::DirichletPenalty { g: &zero, beta: self.beta }),
            (BoundaryKind::Neumann, BoundaryCondition::Neumann { g: &pull }),
        ];
        let system = assemble(&mesh, &dofmap, &domain, &physics, None, &bcs, &self.quadrature)?;
        Ok(Discretization { mesh, dofmap, domain, physics, system })
    }
}

/// Outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverMode {
    /// Stand-alone multigrid iteration.
    MgSolver,
    /// CG with a single-level preconditioner (the configured smoother), or
    /// none at all.
    Cg { preconditioned: bool },
    /// CG preconditioned by one V-cycle.
    CgMg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub cycle: CycleConfig,
    pub tol: f64,
    pub max_it: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { mode: SolverMode::CgMg, cycle: CycleConfig::default(), tol: 1e-9, max_it: 500 }
    }
}

impl SolverConfig {
    pub fn new(mode: SolverMode, smoother: SmootherKind) -> Self {
        let mut c = Self { mode, ..Self::default() };
        c.cycle.smoother = smoother;
        c
    }
}

impl Discretization {
    pub fn dof_count(&self) -> usize {
        self.dofmap.len()
    }

    /// Solves the assembled system. `clock` returns seconds and is used to
    /// fill the phase timings of the report.
    pub fn solve_timed(&self, config: &SolverConfig, clock: &mut dyn FnMut() -> f64) -> Result<(Vec<f64>, SolveReport)> {
        let a = &self.system.matrix;
        let b = &self.system.rhs;
        let mut t = PhaseTimings::default();
        let mut cycle = config.cycle;
        cycle.symmetric = config.mode != SolverMode::MgSolver;
        let (x, mut report) = match config.mode {
            SolverMode::Cg { preconditioned } => {
                let t0 = clock();
                let smoother = if preconditioned {
                    let level = MgLevel::full(&self.dofmap, a);
                    Some(Smoother::build(cycle.smoother, cycle.omega, &level, &self.mesh, &self.dofmap)?)
                } else {
                    None
                };
                let t1 = clock();
                t.smoothers = t1 - t0;
                let pre = smoother.as_ref().map_or(Preconditioner::None, Preconditioner::Smoother);
                let out = pcg(a, b, &pre, config.tol, config.max_it)?;
                t.iterate = clock() - t1;
                out
            }
            SolverMode::MgSolver | SolverMode::CgMg => {
                let t0 = clock();
                let hierarchy = LevelHierarchy::build(&self.dofmap, a)?;
                let t1 = clock();
                let smoothers = crate::mg::build_smoothers(&hierarchy, &cycle, &self.mesh, &self.dofmap)?;
                let coarse = CoarseSolver::build(cycle.coarse, &hierarchy.levels[0], &self.mesh, &self.dofmap)?;
                let t2 = clock();
                let mg = Multigrid::new(hierarchy, smoothers, coarse, cycle)?;
                let out = if config.mode == SolverMode::CgMg {
                    pcg(a, b, &Preconditioner::Multigrid(&mg), config.tol, config.max_it)?
                } else {
                    mg.solve(b, config.tol, config.max_it)?
                };
                t.hierarchy = t1 - t0;
                t.smoothers = t2 - t1;
                t.iterate = clock() - t2;
                out
            }
        };
        report.timings = t;
        Ok((x, report))
    }

    pub fn solve(&self, config: &SolverConfig) -> Result<(Vec<f64>, SolveReport)> {
        self.solve_timed(config, &mut || 0.0)
    }
}
