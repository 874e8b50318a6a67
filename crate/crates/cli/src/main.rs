//! `gscm3d` command line: validate a configuration, run a simulation, or
//! re-aggregate statistics from an existing links.csv.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gscm3d::config::{self, Emit, RunConfig};
use gscm3d::output;
use gscm3d::statistics::Binning;

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

#[derive(Parser)]
#[command(
    name = "gscm3d",
    version,
    about = "3D geometry-based stochastic channel simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration and print the resolved form.
    ValidateConfig {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Print only diagnostics, not the resolved configuration.
        #[arg(long)]
        quiet: bool,
    },
    /// Run the configured drops and write the selected outputs.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to run.output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Outputs to write; replaces run.emit when given.
        #[arg(long, value_enum)]
        emit: Vec<EmitArg>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Recompute stats.json and distributions.csv from a links.csv.
    Stats {
        records: PathBuf,
        /// Configuration whose statistics section selects the binning.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Records,
    Cir,
    Stats,
}

impl From<EmitArg> for Emit {
    fn from(e: EmitArg) -> Self {
        match e {
            EmitArg::Records => Emit::Records,
            EmitArg::Cir => Emit::Cir,
            EmitArg::Stats => Emit::Stats,
        }
    }
}

enum Failure {
    Validation(String),
    Runtime(String),
}

fn load(path: Option<&Path>, seed: Option<u64>) -> Result<RunConfig, Failure> {
    let r = match path {
        Some(p) => config::load_config(p, seed),
        None => config::parse_config("", seed),
    };
    r.map_err(|d| Failure::Validation(d.to_string()))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::ValidateConfig {
            config,
            seed,
            quiet,
        } => {
            let cfg = load(config.as_deref(), seed)?;
            if !quiet {
                print!("{}", cfg.echo());
            }
            Ok(())
        }
        Command::Run {
            config,
            seed,
            out,
            emit,
            workers,
        } => {
            let cfg = load(config.as_deref(), seed)?;
            if workers == Some(0) {
                return Err(Failure::Validation("--workers must be at least 1".into()));
            }
            let out = out.or_else(|| cfg.run.output_dir.clone()).ok_or_else(|| {
                Failure::Validation("no output directory: pass --out or set run.output_dir".into())
            })?;
            let emit: Vec<Emit> = emit.into_iter().map(Emit::from).collect();
            let result = gscm3d::run::run(&cfg, &out, &emit, workers)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            eprintln!("wrote {} files to {}", result.files.len(), out.display());
            Ok(())
        }
        Command::Stats {
            records,
            config,
            out,
        } => {
            let binning = match config {
                Some(p) => load(Some(&p), Some(0))?.statistics.binning,
                None => Binning::FreedmanDiaconis,
            };
            let text = std::fs::read_to_string(&records)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", records.display())))?;
            let report = output::stats_from_links_csv(&text, binning)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            let write = |name: &str, body: String| {
                output::write_file(&out.join(name), body.as_bytes())
                    .map_err(|e| Failure::Runtime(e.to_string()))
            };
            std::fs::create_dir_all(&out)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
            write("stats.json", report.to_json())?;
            write("distributions.csv", report.distributions_csv())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
