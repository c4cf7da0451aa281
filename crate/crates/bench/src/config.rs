//! Benchmark configuration files (TOML).
//!
//! ```toml
//! [problem]
//! kind = "rotated-square"
//! angle_deg = 30.0
//!
//! [discretization]
//! h = 0.125
//! p = 3
//!
//! [solver]
//! mode = "cg+mg"
//! smoother = "patchwise"
//! ```
//!
//! Everything else has defaults. Validation errors name the offending field
//! as a dotted path, e.g. `problem.angle_deg`.

use std::fmt;
use std::path::Path;

use fcmg_core::assembly::QuadratureConfig;
use fcmg_core::basis::Space;
use fcmg_core::mesh::DEFAULT_MAX_DEPTH;
use fcmg_core::mg::{CoarseSolverKind, CycleConfig, SmootherKind};
use fcmg_core::problems::{
    Discretization, PerforatedPlateProblem, Refinement, RotatedSquareProblem, SolverConfig, SolverMode,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("cannot read {file}: {source}")]
    Io { file: String, source: std::io::Error },
}

impl ConfigError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid { path: path.into(), message: message.into() }
    }

    /// Dotted field path, when the error is about a field.
    pub fn path(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { path, .. } => Some(path),
            ConfigError::Io { .. } => None,
        }
    }
}

/// Parses TOML into `T`, reporting type errors with the field path.
pub(crate) fn parse_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::invalid("<root>", e.message().to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_string() } else { path };
        ConfigError::invalid(path, e.into_inner().message().to_string())
    })
}

pub(crate) fn read_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { file: path.display().to_string(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    RotatedSquare { angle_deg: f64 },
    PerforatedPlate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceName {
    Tensor,
    Trunk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefinementName {
    Uniform,
    TowardBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    /// Element size. For the plate this is relative: `4 / h` elements per side.
    pub h: Option<f64>,
    /// Elements per direction; alternative to `h`.
    pub n: Option<usize>,
    pub p: usize,
    #[serde(default)]
    pub k: usize,
    #[serde(default = "default_space")]
    pub space: SpaceName,
    #[serde(default = "default_refinement")]
    pub refinement: RefinementName,
}

fn default_space() -> SpaceName {
    SpaceName::Tensor
}

fn default_refinement() -> RefinementName {
    RefinementName::TowardBoundary
}

/// Finite cell parameters; `None` keeps the problem's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FcmConfig {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Quadtree depth of the cut-cell integration.
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeName {
    #[serde(rename = "mg-solver")]
    MgSolver,
    /// Unpreconditioned CG.
    #[serde(rename = "cg")]
    Cg,
    /// CG preconditioned by the smoother alone.
    #[serde(rename = "cg+smoother")]
    CgSmoother,
    #[serde(rename = "cg+mg")]
    CgMg,
}

impl ModeName {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeName::MgSolver => "mg-solver",
            ModeName::Cg => "cg",
            ModeName::CgSmoother => "cg+smoother",
            ModeName::CgMg => "cg+mg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [ModeName::MgSolver, ModeName::Cg, ModeName::CgSmoother, ModeName::CgMg].into_iter().find(|m| m.as_str() == s)
    }

    fn solver_mode(self) -> SolverMode {
        match self {
            ModeName::MgSolver => SolverMode::MgSolver,
            ModeName::Cg => SolverMode::Cg { preconditioned: false },
            ModeName::CgSmoother => SolverMode::Cg { preconditioned: true },
            ModeName::CgMg => SolverMode::CgMg,
        }
    }
}

impl fmt::Display for ModeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmootherName {
    Jacobi,
    GaussSeidel,
    Elementwise,
    Patchwise,
}

impl SmootherName {
    pub fn as_str(self) -> &'static str {
        match self {
            SmootherName::Jacobi => "jacobi",
            SmootherName::GaussSeidel => "gauss-seidel",
            SmootherName::Elementwise => "elementwise",
            SmootherName::Patchwise => "patchwise",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [SmootherName::Jacobi, SmootherName::GaussSeidel, SmootherName::Elementwise, SmootherName::Patchwise]
            .into_iter()
            .find(|m| m.as_str() == s)
    }

    pub fn kind(self) -> SmootherKind {
        match self {
            SmootherName::Jacobi => SmootherKind::Jacobi,
            SmootherName::GaussSeidel => SmootherKind::GaussSeidel,
            SmootherName::Elementwise => SmootherKind::SchwarzElementwise,
            SmootherName::Patchwise => SmootherKind::SchwarzPatchwise,
        }
    }
}

impl fmt::Display for SmootherName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoarseName {
    Direct,
    InnerCg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub mode: ModeName,
    pub smoother: SmootherName,
    /// Relaxation parameter; defaults per smoother.
    pub omega: Option<f64>,
    /// Pre- and post-smoothing steps per level.
    #[serde(default = "default_steps")]
    pub smoothing_steps: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_it")]
    pub max_it: usize,
    #[serde(default = "default_coarse")]
    pub coarse: CoarseName,
}

fn default_steps() -> usize {
    CycleConfig::default().pre_steps
}

fn default_tol() -> f64 {
    1e-9
}

fn default_max_it() -> usize {
    500
}

fn default_coarse() -> CoarseName {
    CoarseName::Direct
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File stem of the run artifacts.
    #[serde(default = "default_name")]
    pub name: String,
    /// Samples per direction of the optional solution grid CSV.
    pub solution_grid: Option<usize>,
}

fn default_name() -> String {
    "run".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { name: default_name(), solution_grid: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub problem: ProblemConfig,
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub fcm: FcmConfig,
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputConfig,
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(path, format!("must be positive and finite, got {v}")))
    }
}

fn nonzero(path: &str, v: usize) -> Result<(), ConfigError> {
    if v > 0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(path, "must be at least 1"))
    }
}

impl BenchmarkConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let c: Self = parse_toml(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml(&read_file(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let ProblemConfig::RotatedSquare { angle_deg } = self.problem {
            if !(0.0..=45.0).contains(&angle_deg) {
                return Err(ConfigError::invalid("problem.angle_deg", format!("must lie in [0, 45], got {angle_deg}")));
            }
        }
        let d = &self.discretization;
        match (d.h, d.n) {
            (Some(h), None) => positive("discretization.h", h)?,
            (None, Some(n)) => nonzero("discretization.n", n)?,
            (Some(_), Some(_)) => return Err(ConfigError::invalid("discretization.h", "give either h or n, not both")),
            (None, None) => return Err(ConfigError::invalid("discretization.h", "one of h or n is required")),
        }
        nonzero("discretization.p", d.p)?;
        if d.p > 10 {
            return Err(ConfigError::invalid("discretization.p", "degrees above 10 are not supported"));
        }
        if d.k > DEFAULT_MAX_DEPTH {
            return Err(ConfigError::invalid("discretization.k", format!("refinement depth above {DEFAULT_MAX_DEPTH} is not supported")));
        }
        if let Some(a) = self.fcm.alpha {
            positive("fcm.alpha", a)?;
            if a > 1.0 {
                return Err(ConfigError::invalid("fcm.alpha", "must not exceed 1"));
            }
        }
        if let Some(b) = self.fcm.beta {
            positive("fcm.beta", b)?;
        }
        if let Some(depth) = self.fcm.depth {
            nonzero("fcm.depth", depth)?;
        }
        let s = &self.solver;
        if let Some(w) = s.omega {
            positive("solver.omega", w)?;
        }
        nonzero("solver.smoothing_steps", s.smoothing_steps)?;
        positive("solver.tol", s.tol)?;
        nonzero("solver.max_it", s.max_it)?;
        if self.output.name.is_empty() || self.output.name.contains(['/', '\\']) {
            return Err(ConfigError::invalid("output.name", "must be a plain, non-empty file stem"));
        }
        if let Some(n) = self.output.solution_grid {
            if n < 2 {
                return Err(ConfigError::invalid("output.solution_grid", "needs at least 2 samples per direction"));
            }
        }
        Ok(())
    }

    /// Element size handed to the problem constructor.
    pub fn h(&self) -> f64 {
        match (self.discretization.h, self.discretization.n) {
            (Some(h), _) => h,
            (None, Some(n)) => match self.problem {
                ProblemConfig::RotatedSquare { .. } => 1.0 / n as f64,
                ProblemConfig::PerforatedPlate => 4.0 / n as f64,
            },
            (None, None) => f64::NAN,
        }
    }

    fn quadrature(&self) -> QuadratureConfig {
        let mut q = QuadratureConfig::default();
        if let Some(depth) = self.fcm.depth {
            q.depth = depth;
        }
        q
    }

    /// Builds mesh, domain, basis and the assembled system.
    pub fn discretize(&self) -> fcmg_core::Result<Discretization> {
        let d = &self.discretization;
        let space = match d.space {
            SpaceName::Tensor => Space::TensorProduct,
            SpaceName::Trunk => Space::Trunk,
        };
        let refinement = match d.refinement {
            RefinementName::Uniform => Refinement::Uniform,
            RefinementName::TowardBoundary => Refinement::TowardBoundary,
        };
        match self.problem {
            ProblemConfig::RotatedSquare { angle_deg } => {
                let mut pr = RotatedSquareProblem::new(angle_deg, self.h(), d.p);
                pr.k = d.k;
                pr.space = space;
                pr.refinement = refinement;
                pr.alpha = self.fcm.alpha.unwrap_or(pr.alpha);
                pr.beta = self.fcm.beta.unwrap_or(pr.beta);
                pr.quadrature = self.quadrature();
                pr.discretize()
            }
            ProblemConfig::PerforatedPlate => {
                let mut pr = PerforatedPlateProblem::new(self.h(), d.p, d.k);
                pr.space = space;
                pr.refinement = refinement;
                pr.alpha = self.fcm.alpha.unwrap_or(pr.alpha);
                pr.beta = self.fcm.beta.unwrap_or(pr.beta);
                pr.quadrature = self.quadrature();
                pr.discretize()
            }
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        let mut c = SolverConfig::new(s.mode.solver_mode(), s.smoother.kind());
        c.cycle.omega = s.omega;
        c.cycle.pre_steps = s.smoothing_steps;
        c.cycle.post_steps = s.smoothing_steps;
        c.cycle.coarse = match s.coarse {
            CoarseName::Direct => CoarseSolverKind::Direct,
            CoarseName::InnerCg => CoarseSolverKind::InnerCg,
        };
        c.tol = s.tol;
        c.max_it = s.max_it;
        c
    }
}
