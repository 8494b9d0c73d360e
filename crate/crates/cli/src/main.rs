use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use haprtr::error::HarnessError;
use haprtr::experiment::threads_from_env;

/// Haplotype assembly by Riemannian trust-region optimization on the sphere.
#[derive(Debug, Parser)]
#[command(name = "haprtr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic instance file.
    Generate {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Observation probability.
        #[arg(long)]
        pd: f64,
        /// Fraction of observed entries to flip.
        #[arg(long, default_value_t = 0.0)]
        err: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assemble the haplotype of one instance file.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "rtr")]
        method: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the solver seed from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a seeded sweep and write results as CSV.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Chart mean Hamming distance against pd from an experiment CSV.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Generate {
            m,
            n,
            pd,
            err,
            seed,
            out,
        } => haprtr::cmd_generate(m, n, pd, err, seed, &out),
        Command::Solve {
            instance,
            method,
            config,
            seed,
        } => {
            let report = haprtr::cmd_solve(&instance, &method, config.as_deref(), seed)?;
            print!("{report}");
            Ok(())
        }
        Command::Experiment { config, out } => {
            let rows = haprtr::cmd_experiment(&config, &out, threads_from_env()?)?;
            eprintln!("wrote {rows} rows to {}", out.display());
            Ok(())
        }
        Command::Plot { csv, out } => haprtr::cmd_plot(&csv, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
