use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fedbea::cli;

#[derive(Parser)]
#[command(
    name = "fedbea",
    version,
    about = "Deterministic federated-optimization simulator \
with modified-loss verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured federated simulation and write metrics.csv
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the verification battery and write report.json
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dirichlet-partition a CSV dataset into client shards
    Partition {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        clients: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run() -> fedbea::Result<()> {
    match Cli::parse().command {
        Command::Simulate { config, out } => {
            let (config, warnings) = cli::load_config(&config)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let path = cli::run_simulation(&config, &out)?;
            println!("metrics written to {}", path.display());
        }
        Command::Verify { config, out } => {
            let (config, warnings) = cli::load_config(&config)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let path = cli::run_verification(&config, &out)?;
            println!("report written to {}", path.display());
        }
        Command::Partition {
            data,
            clients,
            alpha,
            seed,
            out,
        } => {
            cli::run_partition(&data, clients, alpha, seed, &out)?;
            println!("partition written to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
