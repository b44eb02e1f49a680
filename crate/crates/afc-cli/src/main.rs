use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use afc_core::{AfcError, ErrorClass};

mod commands;

#[derive(Debug, Parser)]
#[command(name = "afc", version, about = "Atomic frequency comb memory toolkit")]
struct Cli {
    /// Seed for stochastic steps (overrides any seed in the configuration).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory receiving every output file and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads for sweeps and ensembles (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a comb spectrum.
    #[command(allow_negative_numbers = true)]
    Synth(commands::SynthArgs),
    /// Fourier analysis, fit and efficiency of a spectrum.
    #[command(allow_negative_numbers = true)]
    Analyze(commands::AnalyzeArgs),
    /// Propagate a pulse through a spectrum and measure the echoes.
    #[command(allow_negative_numbers = true)]
    Echo(commands::EchoArgs),
    /// Burn combs over a power sweep.
    #[command(allow_negative_numbers = true)]
    Prepare(commands::PrepareArgs),
    /// Simulate gated photon counting.
    #[command(allow_negative_numbers = true)]
    Counts(commands::CountsArgs),
    /// Tabulate optimal finesse and efficiency against depth.
    #[command(allow_negative_numbers = true)]
    Optimize(commands::OptimizeArgs),
}

fn run(cli: Cli) -> afc_core::Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(AfcError::invalid("workers", "must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| AfcError::invalid("workers", e.to_string()))?;
    }
    std::fs::create_dir_all(&cli.out_dir)?;
    let ctx = commands::Context {
        out_dir: cli.out_dir,
        seed: cli.seed,
    };
    match cli.command {
        Command::Synth(a) => commands::synth(&ctx, a),
        Command::Analyze(a) => commands::analyze(&ctx, a),
        Command::Echo(a) => commands::echo(&ctx, a),
        Command::Prepare(a) => commands::prepare(&ctx, a),
        Command::Counts(a) => commands::counts(&ctx, a),
        Command::Optimize(a) => commands::optimize(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.class() {
                ErrorClass::Validation => ExitCode::from(2),
                ErrorClass::Numerical => ExitCode::from(3),
            }
        }
    }
}
