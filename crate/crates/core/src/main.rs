use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use graph_willmore::cli::{self, Overrides};

/// Willmore and Canham-Helfrich energies of graph surfaces.
#[derive(Parser)]
#[command(name = "willmore", version)]
struct Args {
    /// Experiment configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides `output`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// RNG seed (overrides `seed`).
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Comma-separated grid spacings, coarsest first (overrides `resolutions`).
    #[arg(long, value_name = "CSV")]
    resolutions: Option<String>,
}

fn main() -> ExitCode {
    let a = Args::parse();
    let o = Overrides { output: a.out, seed: a.seed, resolutions: a.resolutions };
    ExitCode::from(cli::main(&a.config, &o))
}
