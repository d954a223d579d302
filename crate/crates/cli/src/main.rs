use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amgpoly_core::experiments::{self, ExperimentConfig};
use amgpoly_core::Error;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "amgpoly", version, about = "AMG-PCG with optimized Chebyshev polynomial smoothers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal interval endpoints and smoothing factors as CSV.
    Optimize {
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        /// Regenerate the shipped parameter tables into this directory.
        #[arg(long, value_name = "DIR")]
        write_tables: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Smoothing factors of the 4th-kind, 1st-kind and optimized 4th-kind
    /// smoothers as CSV.
    Bounds {
        #[arg(long, default_value_t = 12)]
        kmax: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Solve one configured problem with AMG-preconditioned CG; JSON report.
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// `key=value`, applied after the config file.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// PCG iterations with 1st- vs 4th-kind polynomial ℓ1-Jacobi
    /// preconditioning on synthetic spectra, as CSV.
    SpectrumGrid {
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
        degrees: Vec<usize>,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Summarize a Matrix Market file; with --solve, run AMG-PCG on it with b = 1.
    Import {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        solve: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> amgpoly_core::Result<ExperimentConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    ExperimentConfig::parse_with_overrides(&text, overrides)
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> amgpoly_core::Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

enum Failure {
    Config(Error),
    Breakdown,
    Other(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Parse { .. } => Failure::Config(e),
            _ => Failure::Other(e),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Optimize { kmax, write_tables, output } => {
            if let Some(dir) = write_tables {
                experiments::write_tables(&dir)?;
                log::info!("wrote tables to {}", dir.display());
            }
            let mut w = sink(output.as_deref()).map_err(Error::from)?;
            experiments::cmd_optimize(kmax, &mut w)?;
            w.flush().map_err(Error::from)?;
        }
        Command::Bounds { kmax, output } => {
            let mut w = sink(output.as_deref()).map_err(Error::from)?;
            experiments::cmd_bounds(kmax, &mut w)?;
            w.flush().map_err(Error::from)?;
        }
        Command::Solve { config, overrides } => {
            let cfg = load_config(config.as_deref(), &overrides)?;
            let out = experiments::cmd_solve(&cfg)?;
            write_json(&out, cfg.output.as_deref())?;
            if out.report.breakdown {
                return Err(Failure::Breakdown);
            }
        }
        Command::SpectrumGrid { sizes, degrees, tol, output } => {
            let mut w = sink(output.as_deref()).map_err(Error::from)?;
            experiments::cmd_spectrum_grid(&sizes, &degrees, tol, &mut w)?;
            w.flush().map_err(Error::from)?;
        }
        Command::Import { matrix, solve, config, overrides } => {
            let cfg = if solve || config.is_some() || !overrides.is_empty() {
                Some(load_config(config.as_deref(), &overrides)?)
            } else {
                None
            };
            let out = experiments::cmd_import(&matrix, cfg.as_ref())?;
            write_json(&out, cfg.as_ref().and_then(|c| c.output.as_deref()))?;
            if out.solve.as_ref().is_some_and(|s| s.report.breakdown) {
                return Err(Failure::Breakdown);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(v) = std::env::var("AMGPOLY_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not size thread pool: {e}");
                }
            }
            _ => {
                eprintln!("error: AMGPOLY_THREADS must be a positive integer, got '{v}'");
                return ExitCode::from(2);
            }
        }
    }
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Breakdown) => {
            eprintln!("error: solver breakdown");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
