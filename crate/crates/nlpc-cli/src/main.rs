//! Batch front-end: parses a structure/pump config file, dispatches
//! subcommands and emits CSV/JSON/SVG artifacts.

mod emit;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "nlpc", version, about = "1D nonlinear photonic crystal design tool")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the run configuration file.
    #[arg(long, global = true, default_value = "nlpc.cfg")]
    config: PathBuf,

    /// Output directory for emitted artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Output formats to emit (repeatable); defaults to everything the
    /// subcommand supports.
    #[arg(long = "format", global = true, value_enum)]
    formats: Vec<Format>,

    /// Worker threads for grid and cone evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Suppress the per-artifact summary lines on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Band diagram over the configured (omega, k_par) grid, both
    /// polarizations.
    Bands,
    /// Normal-incidence stopband intervals.
    Stopbands,
    /// Dispersion surface K_z(k_par) at fixed frequency.
    Surface,
    /// Bloch mode space-harmonic spectrum of the pump mode.
    Modes,
    /// Planar phase-matching solutions.
    Match,
    /// Emission cones and their entanglement-direction crossings.
    Cones,
    /// Four-factor relative-efficiency report.
    Efficiency,
    /// Birefringence-maximizing fill fraction for the stack materials.
    OptimizeFill,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let formats = if cli.formats.is_empty() {
        vec![Format::Csv, Format::Json, Format::Svg]
    } else {
        cli.formats.clone()
    };

    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.threads {
            builder = builder.num_threads(n);
        }
        match builder.build() {
            Ok(p) => p,
            Err(e) => {
                eprintln!("nlpc: cannot build thread pool: {e}");
                return ExitCode::from(1);
            }
        }
    };

    let outcome = pool.install(|| {
        run::dispatch(cli.command, &cli.config, &cli.out, &formats, cli.quiet)
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nlpc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
