//! Cartesian parameter sweeps.
//!
//! A sweep file is a benchmark config under `[base]` plus optional lists
//! `p`, `h`, `k`, `smoother` and `mode` at the top level. Missing lists use
//! the base value. Cells are numbered in row-major order of
//! `p, h, k, smoother, mode` and the output keeps that order no matter how
//! many threads ran them.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{parse_toml, read_file, BenchmarkConfig, ConfigError, ModeName, SmootherName};
use crate::report::{run, RunReport, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub p: Option<Vec<usize>>,
    pub h: Option<Vec<f64>>,
    pub k: Option<Vec<usize>>,
    pub smoother: Option<Vec<SmootherName>>,
    pub mode: Option<Vec<ModeName>>,
    pub base: BenchmarkConfig,
}

fn axis<T: Clone>(name: &str, values: &Option<Vec<T>>, base: T) -> Result<Vec<T>, ConfigError> {
    match values {
        Some(v) if v.is_empty() => Err(ConfigError::invalid(name, "must not be empty")),
        Some(v) => Ok(v.clone()),
        None => Ok(vec![base]),
    }
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let s: Self = parse_toml(text)?;
        s.cells()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml(&read_file(path)?)
    }

    /// One validated config per cell of the product.
    pub fn cells(&self) -> Result<Vec<BenchmarkConfig>, ConfigError> {
        let b = &self.base;
        let ps = axis("p", &self.p, b.discretization.p)?;
        let hs = axis("h", &self.h, b.h())?;
        let ks = axis("k", &self.k, b.discretization.k)?;
        let sms = axis("smoother", &self.smoother, b.solver.smoother)?;
        let modes = axis("mode", &self.mode, b.solver.mode)?;
        let mut out = Vec::with_capacity(ps.len() * hs.len() * ks.len() * sms.len() * modes.len());
        for &p in &ps {
            for &h in &hs {
                for &k in &ks {
                    for &sm in &sms {
                        for &mode in &modes {
                            let mut c = b.clone();
                            c.discretization.p = p;
                            c.discretization.h = Some(h);
                            c.discretization.n = None;
                            c.discretization.k = k;
                            c.solver.smoother = sm;
                            c.solver.mode = mode;
                            c.output.name = format!("{}-{}", b.output.name, out.len());
                            c.validate().map_err(|e| match e {
                                ConfigError::Invalid { path, message } => {
                                    ConfigError::invalid(format!("base.{path}"), format!("{message} (cell {})", out.len()))
                                }
                                other => other,
                            })?;
                            out.push(c);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One line of the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: usize,
    pub h: f64,
    pub k: usize,
    pub smoother: SmootherName,
    pub mode: ModeName,
    /// Iteration count, `*` (not converged), `div.` (diverged) or `err`.
    pub iterations: String,
    pub rho_max: Option<f64>,
}

impl SweepRow {
    pub fn from_report(r: &RunReport) -> Self {
        let c = &r.config;
        Self {
            p: c.discretization.p,
            h: c.h(),
            k: c.discretization.k,
            smoother: c.solver.smoother,
            mode: c.solver.mode,
            iterations: r.iterations_cell(),
            rho_max: r.rho_max,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cell {cell} failed: {message}")]
    Cell { cell: usize, message: String },
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs every cell on `threads` workers. With `strict`, the first failed
/// cell aborts the sweep; otherwise failures are kept as rows.
pub fn run_sweep(spec: &SweepSpec, threads: usize, seed: u64, strict: bool) -> Result<Vec<RunReport>, SweepError> {
    let cells = spec.cells()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                let r = run(c, seed).report;
                if strict && r.status == Status::Failed {
                    return Err(SweepError::Cell { cell: i, message: r.error.unwrap_or_default() });
                }
                Ok(r)
            })
            .collect()
    })
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> csv::Result<Vec<SweepRow>> {
    csv::Reader::from_path(path)?.deserialize().collect()
}
