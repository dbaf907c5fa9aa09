use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use partitioned_fsi::config::RunConfig;
use partitioned_fsi::report::{summary_string, write_outputs, RunReport};
use partitioned_fsi::sweep::{default_workers, run_all, run_sweep, split_values, SweepAxis};
use partitioned_fsi::Result;

/// Partitioned FSI coupling runs and parameter sweeps.
///
/// Exit status: 0 when every run completed, 2 when at least one run
/// diverged or hit the incompressibility dilemma, 1 on configuration or
/// I/O errors.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Output directory; defaults to the config's `output_path`, else `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Concurrent runs; defaults to the available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one config.
    Run { config: PathBuf },
    /// Run one config per value along a single axis.
    Sweep {
        config: PathBuf,
        /// robin_parameter, update, omega or dt
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
    },
}

fn execute(cli: Cli) -> Result<bool> {
    let workers = cli.workers.unwrap_or_else(default_workers);
    let (base, reports): (RunConfig, Vec<RunReport>) = match cli.command {
        Command::Run { config } => {
            let base = RunConfig::from_file(&config)?;
            let reports = run_all(vec![base.clone()], workers)?;
            (base, reports)
        }
        Command::Sweep { config, axis, values } => {
            let base = RunConfig::from_file(&config)?;
            let axis: SweepAxis = axis.parse()?;
            let sweep = run_sweep(&base, axis, &split_values(&values), workers)?;
            (base, sweep.runs)
        }
    };
    let dir = cli
        .out
        .or_else(|| base.output_path.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let files = write_outputs(&reports, &dir)?;
    print!("{}", summary_string(&reports)?);
    eprintln!("wrote {} and {}", files.summary.display(), files.report.display());
    Ok(reports.iter().all(RunReport::completed))
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
