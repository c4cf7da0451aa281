use thiserror::Error;

/// Errors raised while building or solving a discretization.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("local coordinate {0} lies outside [-1, 1]")]
    CoordinateOutOfRange(f64),
    #[error("elements must be square (hx = {hx}, hy = {hy})")]
    NonSquareElements { hx: f64, hy: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("boundary curve {curve} leaves the background grid")]
    CurveOutsideGrid { curve: usize },
    #[error("a Dirichlet condition was given but no Dirichlet boundary curve is registered")]
    MissingDirichletQuadrature,
    #[error("leaf element in base element {element} has no quadrature points")]
    EmptyQuadrature { element: usize },
    #[error("multigrid level (p = {p}, k = {k}) contains no unknowns")]
    EmptyLevel { p: usize, k: usize },
    #[error("Schwarz block {block} is not positive definite (pivot {pivot} = {value:e})")]
    SingularBlock { block: usize, pivot: usize, value: f64 },
    #[error("coarse matrix is not positive definite (pivot {pivot} = {value:e})")]
    SingularCoarse { pivot: usize, value: f64 },
    #[error("matrix is not positive definite (p^T A p = {0:e})")]
    Indefinite(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
