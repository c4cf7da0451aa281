//! Hierarchical p/hp-multigrid.
//!
//! Because the basis is hierarchical, every coarse level is a subset of the
//! fine unknowns: restriction is a gather, prolongation a scatter, and each
//! level matrix is a principal submatrix of the fine one.

pub mod coarse;
pub mod cycle;
pub mod hierarchy;
pub mod krylov;
pub mod report;
pub mod smoother;

pub use coarse::{CoarseSolver, CoarseSolverKind, SkylineCholesky};
pub use cycle::{build_smoothers, CycleConfig, Multigrid};
pub use hierarchy::{level_sequence, LevelHierarchy, MgLevel};
pub use krylov::{pcg, Preconditioner};
pub use report::{contraction_stats, PhaseTimings, SolveReport, DIVERGENCE_WINDOW};
pub use smoother::{schwarz_blocks, SchwarzBlock, Smoother, SmootherKind, SmootherWork, Sweep};
