//! Finite cell discretizations on uniform and multi-level hp-refined
//! Cartesian grids, solved with a hierarchical p/hp-multigrid that smooths
//! with additive Schwarz blocks.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration
//! and the benchmark CLI live in the `fcmg-bench` companion crate.
//!
//! Pipeline:
//!
//! 1. [`mesh::BaseGrid`] and [`mesh::HpMesh`] describe the background grid and
//!    its refinement trees.
//! 2. [`immersed::ImplicitDomain`] classifies cells and supplies volume and
//!    boundary quadrature.
//! 3. [`mesh::DofMap`] numbers the active hierarchical shape functions.
//! 4. [`assembly::assemble`] builds the penalized system.
//! 5. [`mg`] builds the level hierarchy by trimming unknowns and solves with
//!    V-cycles, either stand-alone or as a CG preconditioner.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assembly;
pub mod basis;
pub mod dense;
mod error;
pub mod immersed;
pub mod mesh;
pub mod mg;
pub mod problems;
pub mod quadrature;
pub mod sparse;

pub use error::{Error, Result};
