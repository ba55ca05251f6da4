//! Writes a seeded random DT file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dtopt::dtfile::DEFAULT_BUFFER_BYTES;
use dtopt::generate::{generate_file, GenConfig, Skew};

/// Generate a random dataset of disturbance traces.
#[derive(Parser)]
#[command(name = "gen-dataset", version)]
struct Cli {
    /// Number of traces.
    #[arg(long)]
    n: u64,
    /// Horizon.
    #[arg(long)]
    h: usize,
    /// Number of distinct disturbance codes.
    #[arg(long, default_value_t = 4)]
    kinds: u64,
    /// Probability that an interval carries a disturbance.
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    /// Probability that a trace extends a prefix of a recent trace.
    #[arg(long, default_value_t = 0.5)]
    share: f64,
    /// Distribution of disturbance codes: uniform or zipf.
    #[arg(long, default_value = "uniform")]
    skew: Skew,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    dtopt_cli::run("gen-dataset", || {
        let cfg = GenConfig {
            density: cli.density,
            share: cli.share,
            skew: cli.skew,
            ..GenConfig::new(cli.n, dtopt_cli::horizon(cli.h)?, cli.kinds, cli.seed)
        };
        generate_file(&cfg, &cli.output, DEFAULT_BUFFER_BYTES)?;
        Ok(())
    })
}
