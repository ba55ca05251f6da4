//! Predicts the execution time of a campaign.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use dtopt::estimator::{predict_campaign, PredictionModel};

/// Print the predicted execution time, in seconds, of a campaign.
#[derive(Parser)]
#[command(name = "est-predict", version)]
struct Cli {
    model: PathBuf,
    /// Campaign text; standard input if omitted.
    campaign: Option<PathBuf>,
    /// Simulation time covered by one interval.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    dtopt_cli::run("est-predict", || {
        if !(cli.tau > 0.0 && cli.tau.is_finite()) {
            anyhow::bail!("--tau must be positive");
        }
        let model = PredictionModel::load(&cli.model)?;
        let total = match &cli.campaign {
            Some(p) => {
                let f = File::open(p).with_context(|| p.display().to_string())?;
                predict_campaign(&model, BufReader::new(f), cli.tau)?
            }
            None => predict_campaign(&model, std::io::stdin().lock(), cli.tau)?,
        };
        println!("{total}");
        Ok(())
    })
}
