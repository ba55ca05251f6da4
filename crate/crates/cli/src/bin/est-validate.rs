//! Measures the run-cost model on fresh random t values.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use dtopt::estimator::validate::{DEFAULT_SEED, DEFAULT_SETS};
use dtopt::estimator::{validate, PredictionModel, TGrid};
use dtopt_cli::AdapterArgs;

/// Validate a model: each set draws one t' per grid value, log-uniform in
/// [t/10, 10t], and reports the mean relative error of run predictions.
#[derive(Parser)]
#[command(name = "est-validate", version)]
struct Cli {
    model: PathBuf,
    #[command(flatten)]
    adapter: AdapterArgs,
    /// Number of validation sets.
    #[arg(long, default_value_t = DEFAULT_SETS)]
    sets: usize,
    /// Seed of the t' draws; defaults to the model's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid lower bound, if the model does not record one.
    #[arg(long)]
    t_min: Option<f64>,
    /// Grid upper bound, if the model does not record one.
    #[arg(long)]
    t_max: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    dtopt_cli::run("est-validate", || {
        let model = PredictionModel::load(&cli.model)?;
        let lo = cli
            .t_min
            .or(model.t_min)
            .context("no t_min in the model; pass --t-min")?;
        let hi = cli
            .t_max
            .or(model.t_max)
            .context("no t_max in the model; pass --t-max")?;
        let grid = TGrid::new(lo, hi)?;
        let seed = cli.seed.or(model.seed).unwrap_or(DEFAULT_SEED);
        let mut adapter = cli.adapter.build()?;
        let report = validate(&mut adapter, &model, &grid.values(), cli.sets, seed)?;
        print!("{report}");
        Ok(())
    })
}
