//! Trains a prediction model against a simulator backend.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use dtopt::adapter::Recorder;
use dtopt::estimator::{train, TrainOptions, DEFAULT_EPSILON, DEFAULT_REPETITIONS};
use dtopt_cli::AdapterArgs;

/// Probe, run the training campaign and fit the prediction model.
///
/// The model is written as TOML to OUTPUT, or to standard output.
#[derive(Parser)]
#[command(name = "est-train", version)]
struct Cli {
    #[command(flatten)]
    adapter: AdapterArgs,
    /// Disturbance codes of the model, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    disturbances: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Passes over the training campaign.
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    repetitions: usize,
    /// Seed recorded in the model and used by later validation.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Fit the breakpoint sweep on one thread.
    #[arg(long)]
    sequential: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Save every probe and timing sample for the recorded backend.
    #[arg(long, value_name = "FILE")]
    samples_out: Option<PathBuf>,
    /// Save the training campaign.
    #[arg(long, value_name = "FILE")]
    campaign_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    dtopt_cli::run("est-train", || {
        dtopt_cli::check_codes(&cli.disturbances)?;
        let mut rec = Recorder::new(cli.adapter.build()?);
        let opts = TrainOptions {
            epsilon: cli.epsilon,
            repetitions: cli.repetitions,
            seed: cli.seed,
            parallelism: if cli.sequential {
                dtopt::Parallelism::Sequential
            } else {
                dtopt::Parallelism::default()
            },
        };
        let t = train(&mut rec, &cli.disturbances, &opts)?;
        if let Some(p) = &cli.samples_out {
            let f = File::create(p).with_context(|| p.display().to_string())?;
            rec.write(BufWriter::new(f))
                .with_context(|| p.display().to_string())?;
        }
        if let Some(p) = &cli.campaign_out {
            std::fs::write(p, t.campaign.campaign.render())
                .with_context(|| p.display().to_string())?;
        }
        eprintln!(
            "t_min={} t_max={} size={} samples={} err={:.4}%",
            t.probe.t_min(),
            t.probe.t_max(),
            t.probe.grid.len(),
            t.samples.len(),
            100.0 * t.model.err
        );
        dtopt_cli::emit(cli.output.as_ref(), &t.model.to_toml())
    })
}
