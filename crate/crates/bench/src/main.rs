use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fcmg_bench::report::write_run;
use fcmg_bench::sweep::{read_sweep_csv, write_sweep_csv};
use fcmg_bench::{run, run_sweep, tables, BenchmarkConfig, Status, SweepRow, SweepSpec};

#[derive(Parser)]
#[command(name = "fcmg", version, about = "Finite cell multigrid benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Recorded in reports; the benchmarks themselves are deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Stop a sweep at the first failed cell and exit non-zero on any failure.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one benchmark configuration.
    Run { config: PathBuf },
    /// Run every cell of a sweep file.
    Sweep { spec: PathBuf },
    /// Check a configuration or sweep file without solving.
    Validate { config: PathBuf },
    /// Render the text tables of a sweep CSV.
    Tables { csv: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match &cli.command {
        Command::Run { config } => {
            let c = BenchmarkConfig::load(config)?;
            let outcome = run(&c, cli.seed);
            for path in write_run(&outcome, &cli.out)? {
                println!("wrote {}", path.display());
            }
            let r = &outcome.report;
            println!("status {:?}, dofs {}, iterations {}", r.status, r.dofs, r.iterations_cell());
            if let Some(e) = &r.error {
                eprintln!("run failed: {e}");
            }
            let failed = r.status == Status::Failed;
            Ok(if failed && cli.strict { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::Sweep { spec } => {
            let s = SweepSpec::load(spec)?;
            let reports = run_sweep(&s, cli.threads, cli.seed, cli.strict)?;
            let rows: Vec<SweepRow> = reports.iter().map(SweepRow::from_report).collect();
            std::fs::create_dir_all(&cli.out)?;
            let csv = cli.out.join("sweep.csv");
            write_sweep_csv(&rows, &csv)?;
            let json = cli.out.join("sweep.json");
            std::fs::write(&json, serde_json::to_string_pretty(&reports)? + "\n")?;
            let text = tables::render(&rows);
            std::fs::write(cli.out.join("sweep.txt"), &text)?;
            print!("{text}");
            println!("wrote {} rows to {}", rows.len(), csv.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let text = std::fs::read_to_string(config)?;
            // sweep files are recognised by their [base] table
            if text.parse::<toml::Table>().is_ok_and(|t| t.contains_key("base")) {
                let n = SweepSpec::from_toml(&text)?.cells()?.len();
                println!("valid sweep, {n} cells");
            } else {
                BenchmarkConfig::from_toml(&text)?;
                println!("valid");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Tables { csv } => {
            print!("{}", tables::render(&read_sweep_csv(csv)?));
            Ok(ExitCode::SUCCESS)
        }
    }
}
