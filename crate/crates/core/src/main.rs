use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hybrid_trial::cli::{run, Mode, RunManifest};

/// Simulate and calibrate two-stage hybrid-control trial designs.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    #[arg(long, value_enum, default_value = "simulate")]
    mode: Mode,
    /// TOML config document.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Replace the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Replace the replication count from the config.
    #[arg(long)]
    reps_override: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Info)
        .init();
    let args = Args::parse();
    let manifest = RunManifest {
        config_path: args.config,
        output_dir: args.out,
        mode: args.mode,
        seed: args.seed,
        workers: args.workers,
        reps_override: args.reps_override,
    };
    match run(&manifest) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
