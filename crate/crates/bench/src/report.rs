//! Run reports and their file formats.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fcmg_core::assembly::evaluate;
use fcmg_core::mg::SolveReport;
use fcmg_core::problems::Discretization;
use serde::{Deserialize, Serialize};

use crate::config::BenchmarkConfig;

/// Bumped whenever a field of [`RunReport`] changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    NotConverged,
    Diverged,
    /// Setup or solve failed; see `error`.
    Failed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub assembly: f64,
    pub hierarchy: f64,
    pub smoothers: f64,
    pub iterate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: BenchmarkConfig,
    pub seed: u64,
    pub status: Status,
    pub error: Option<String>,
    pub dofs: usize,
    pub iterations: usize,
    /// Largest contraction number after the first; absent for fewer than
    /// two iterations, the string `"inf"` once a residual blew up.
    #[serde(with = "unbounded")]
    pub rho_max: Option<f64>,
    /// Relative residuals; non-finite values appear as `null`.
    pub residual_history: Vec<f64>,
    pub timings: Timings,
}

impl RunReport {
    fn failed(config: &BenchmarkConfig, seed: u64, dofs: usize, error: String) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            seed,
            status: Status::Failed,
            error: Some(error),
            dofs,
            iterations: 0,
            rho_max: None,
            residual_history: Vec::new(),
            timings: Timings::default(),
        }
    }

    fn from_solve(config: &BenchmarkConfig, seed: u64, dofs: usize, r: SolveReport, assembly: f64) -> Self {
        let status = if r.converged {
            Status::Converged
        } else if r.diverged {
            Status::Diverged
        } else {
            Status::NotConverged
        };
        let t = r.timings;
        Self {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            seed,
            status,
            error: None,
            dofs,
            iterations: r.iterations,
            rho_max: (!r.rho_max.is_nan()).then_some(r.rho_max),
            residual_history: r.residual_history,
            timings: Timings { assembly, hierarchy: t.hierarchy, smoothers: t.smoothers, iterate: t.iterate },
        }
    }

    /// Iteration count as printed in tables: the count, `*` or `div.`.
    pub fn iterations_cell(&self) -> String {
        match self.status {
            Status::Converged => self.iterations.to_string(),
            Status::NotConverged => "*".into(),
            Status::Diverged => "div.".into(),
            Status::Failed => "err".into(),
        }
    }
}

/// JSON has no infinity; write it as a string.
mod unbounded {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_infinite() => s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" }),
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Number(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) => t.parse().map(Some).map_err(serde::de::Error::custom),
        }
    }
}

/// A finished run: the report plus what is needed to export the solution.
pub struct RunOutcome {
    pub report: RunReport,
    pub solution: Option<(Discretization, Vec<f64>)>,
}

/// Discretizes and solves `config`. Failures end up in the report.
pub fn run(config: &BenchmarkConfig, seed: u64) -> RunOutcome {
    let start = Instant::now();
    let clock = move || start.elapsed().as_secs_f64();
    let disc = match config.discretize() {
        Ok(d) => d,
        Err(e) => return RunOutcome { report: RunReport::failed(config, seed, 0, e.to_string()), solution: None },
    };
    let assembly = clock();
    let mut c = clock;
    match disc.solve_timed(&config.solver_config(), &mut c) {
        Ok((u, r)) => RunOutcome {
            report: RunReport::from_solve(config, seed, disc.dof_count(), r, assembly),
            solution: Some((disc, u)),
        },
        Err(e) => {
            let mut report = RunReport::failed(config, seed, disc.dof_count(), e.to_string());
            // CG breaking down on a preconditioner that lost definiteness is
            // an unstable solver, not a broken setup.
            if matches!(e, fcmg_core::Error::Indefinite(_)) {
                report.status = Status::Diverged;
            }
            RunOutcome { report, solution: None }
        }
    }
}

pub fn write_json(report: &RunReport, path: &Path) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, report)?;
    writeln!(f)?;
    f.flush()
}

/// `iteration,residual,contraction`; the first contraction is empty.
pub fn write_residual_csv(report: &RunReport, path: &Path) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "residual", "contraction"])?;
    let h = &report.residual_history;
    for (i, r) in h.iter().enumerate() {
        let rho = if i == 0 { String::new() } else { (r / h[i - 1]).to_string() };
        w.write_record([i.to_string(), r.to_string(), rho])?;
    }
    w.flush()?;
    Ok(())
}

/// Samples the solution on an `n x n` grid over the mesh bounds. Points
/// outside the physical domain are skipped. Columns: `x,y,u` for scalar
/// problems and `x,y,ux,uy` for elasticity.
pub fn write_solution_csv(disc: &Discretization, u: &[f64], n: usize, path: &Path) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let fields = disc.physics.n_fields();
    if fields == 1 {
        w.write_record(["x", "y", "u"])?;
    } else {
        w.write_record(["x", "y", "ux", "uy"])?;
    }
    let b = disc.mesh.grid.bounds();
    for j in 0..n {
        for i in 0..n {
            let t = [i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64];
            let x = [b.min[0] + t[0] * b.width(), b.min[1] + t[1] * b.height()];
            if !disc.domain.inside(x) {
                continue;
            }
            let Some((v, _)) = evaluate(&disc.mesh, &disc.dofmap, u, x) else { continue };
            let mut rec = vec![x[0].to_string(), x[1].to_string()];
            rec.extend(v[..fields].iter().map(|c| c.to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `<name>.report.json`, `<name>.residuals.csv` and, if requested,
/// `<name>.solution.csv` into `dir`. Returns the written paths.
pub fn write_run(outcome: &RunOutcome, dir: &Path) -> Result<Vec<PathBuf>, Box<dyn std::error::Error>> {
    std::fs::create_dir_all(dir)?;
    let r = &outcome.report;
    let name = &r.config.output.name;
    let json = dir.join(format!("{name}.report.json"));
    write_json(r, &json)?;
    let hist = dir.join(format!("{name}.residuals.csv"));
    write_residual_csv(r, &hist)?;
    let mut out = vec![json, hist];
    if let (Some(n), Some((disc, u))) = (r.config.output.solution_grid, &outcome.solution) {
        let sol = dir.join(format!("{name}.solution.csv"));
        write_solution_csv(disc, u, n, &sol)?;
        out.push(sol);
    }
    Ok(out)
}
