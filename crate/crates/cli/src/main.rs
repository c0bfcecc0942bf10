//! Command-line entry point: scene generation, tracking, evaluation, and
//! particle-count sweeps.
//!
//! Exit codes are a stable contract for scripting: 0 success, 1 usage or
//! configuration error, 2 data error (unreadable frames, malformed NTXY,
//! empty ground truth).

mod commands;
mod config_file;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use pftrack_core::Error;

#[derive(Parser)]
#[command(name = "pftrack", version, about = "Multi-target particle-filter tracking toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene spec to P6 frames plus NTXY ground truth
    Synth {
        /// Scene spec file (key = value text with [actor] blocks)
        spec: PathBuf,
        /// Output directory for frames, ground_truth.ntxy and manifest.txt
        #[arg(long)]
        out: PathBuf,
    },
    /// Track objects across a frame sequence, writing NTXY and timing CSV
    Track {
        /// Directory of frame_%06d.ppm files
        frames: PathBuf,
        /// Output directory for trajectories.ntxy, timing.csv, manifest.txt
        #[arg(long)]
        out: PathBuf,
        /// Tracker config file (key = value)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the particle count M
        #[arg(long)]
        particles: Option<usize>,
        /// Override the RNG seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare a system NTXY file against ground truth
    Eval {
        /// Ground-truth NTXY file
        #[arg(long)]
        gt: PathBuf,
        /// System NTXY file
        #[arg(long)]
        sys: PathBuf,
        /// Correctness threshold in pixels
        #[arg(long, default_value_t = 25.0)]
        threshold: f64,
        /// Output directory for report.csv and manifest.txt
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the tracker once per particle count and report cost-benefit
    Sweep {
        /// Directory of frame_%06d.ppm files
        frames: PathBuf,
        /// Ground-truth NTXY file
        #[arg(long)]
        gt: PathBuf,
        /// Output directory for sweep.csv, cost_benefit.csv, manifest.txt
        #[arg(long)]
        out: PathBuf,
        /// Tracker config file (key = value)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated particle counts (default 50..130 step 10)
        #[arg(long, value_delimiter = ',')]
        m_list: Option<Vec<usize>>,
        /// Override the RNG seed
        #[arg(long)]
        seed: Option<u64>,
        /// Correctness threshold in pixels
        #[arg(long, default_value_t = 25.0)]
        threshold: f64,
    },
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        // Usage and configuration problems.
        Error::Config { .. } | Error::SceneSpec { .. } | Error::InsufficientSweepRows { .. } => 1,
        // Everything else is bad input data or I/O.
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Synth { spec, out } => commands::cmd_synth(&spec, &out),
        Command::Track { frames, out, config, particles, seed } => {
            commands::cmd_track(&frames, &out, config.as_deref(), particles, seed)
        }
        Command::Eval { gt, sys, threshold, out } => {
            commands::cmd_eval(&gt, &sys, threshold, &out)
        }
        Command::Sweep { frames, gt, out, config, m_list, seed, threshold } => {
            let m_list = m_list.unwrap_or_else(|| (50..=130).step_by(10).collect());
            commands::cmd_sweep(&frames, &gt, &out, config.as_deref(), &m_list, seed, threshold)
        }
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
