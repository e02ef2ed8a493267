//! `psp` — batch frontend for the phase sampling profilometry pipeline.
//!
//! Subcommands mirror the pipeline stages; every intermediate artifact is
//! a stable file format so stages compose through the filesystem:
//!
//! ```text
//! psp pattern     design the sampled phase pattern        -> PGM
//! psp simulate    deform it with a synthetic scene        -> PGM + CSV
//! psp recover     reconstruct the dense signal            -> CSV + JSON
//! psp calibrate   least-squares camera/projector solve    -> JSON
//! psp reconstruct triangulate a recovered phase field     -> PLY
//! psp report      run experiment presets or sweeps        -> JSON/CSV/SVG
//! ```
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation failure,
//! 3 numerical diagnostic.

mod commands;
mod error;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "psp", version, about = "Phase sampling profilometry pipeline")]
struct Cli {
    /// Cap the worker thread count (default: all cores). Outputs are
    /// identical for every value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print progress details to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the designed sampled phase pattern.
    Pattern(commands::pattern::PatternArgs),
    /// Deform a pattern with a synthetic scene and export the signals.
    Simulate(commands::simulate::SimulateArgs),
    /// Recover the dense signal from a sampled-signal CSV.
    Recover(commands::recover::RecoverArgs),
    /// Solve camera and projector parameters from correspondences.
    Calibrate(commands::calibrate::CalibrateArgs),
    /// Triangulate a recovered phase field into a point cloud.
    Reconstruct(commands::reconstruct::ReconstructArgs),
    /// Run experiments (or a sampling-period sweep) and write reports.
    Report(commands::report::ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Ignore the error if a pool already exists (tests call run twice).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match cli.command {
        Command::Pattern(args) => commands::pattern::run(args, cli.verbose),
        Command::Simulate(args) => commands::simulate::run(args, cli.verbose),
        Command::Recover(args) => commands::recover::run(args, cli.verbose),
        Command::Calibrate(args) => commands::calibrate::run(args, cli.verbose),
        Command::Reconstruct(args) => commands::reconstruct::run(args, cli.verbose),
        Command::Report(args) => commands::report::run(args, cli.verbose),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("psp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
