use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use fundsim_cli::config::RunConfig;
use fundsim_cli::{report, run, validate, CliError};
use fundsim_core::synth::{self, SynthConfig};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "fundsim", version, about = "Walk-forward multi-agent fund simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a data directory; exit 2 on any violation.
    Validate { data_dir: PathBuf },
    /// Run a walk-forward simulation from a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        start: Option<NaiveDate>,
        #[arg(long)]
        end: Option<NaiveDate>,
        /// Threads for strategy-pool backtests (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Print the metric table and write cumulative_returns.csv for a run directory.
    Report { run_dir: PathBuf },
    /// Metric table over several runs and a merged long-format return CSV.
    Compare {
        #[arg(required = true, num_args = 2..)]
        run_dirs: Vec<PathBuf>,
        #[arg(long, default_value = "comparison.csv")]
        out: PathBuf,
    },
    /// Write a synthetic data directory (bars, news, sector map).
    Synth {
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        symbols: usize,
        #[arg(long, default_value_t = 504)]
        days: usize,
        #[arg(long, default_value_t = 20_240_101)]
        seed: u64,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { data_dir } => {
            let report = validate::validate_dir(&data_dir)?;
            println!("{report}");
            if !report.is_clean() {
                return Err(CliError::Invalid(format!("{} violations in {}", report.violations(), data_dir.display())));
            }
        }
        Command::Run {
            config,
            output,
            seed,
            start,
            end,
            jobs,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(o) = output {
                cfg.output = o;
            }
            if seed.is_some() {
                cfg.seed = seed;
            }
            if start.is_some() {
                cfg.data.start = start;
            }
            if end.is_some() {
                cfg.data.end = end;
            }
            if jobs > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build_global()
                    .map_err(|e| CliError::Invalid(format!("--jobs: {e}")))?;
            }
            let summary = run::cmd_run(&cfg)?;
            let m = &summary.manifest;
            println!(
                "{} trading days {} to {}, meetings {:?}, artifacts in {}",
                m.trading_days,
                m.start.map_or("-".into(), |d| d.to_string()),
                m.end.map_or("-".into(), |d| d.to_string()),
                m.meetings,
                cfg.output.display()
            );
        }
        Command::Report { run_dir } => print!("{}", report::cmd_report(&run_dir)?),
        Command::Compare { run_dirs, out } => {
            print!("{}", report::cmd_compare(&run_dirs, &out)?);
            println!("long-format returns written to {}", out.display());
        }
        Command::Synth { out, symbols, days, seed } => {
            let data = synth::generate(&SynthConfig {
                symbols,
                days,
                seed,
                ..SynthConfig::default()
            });
            data.write_dir(&out).map_err(|e| CliError::Invalid(e.to_string()))?;
            println!("{} bars, {} headlines written to {}", data.bars.len(), data.news.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("FUNDSIM_LOG").unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
