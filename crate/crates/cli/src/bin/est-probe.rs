//! Finds the sampling range of a simulator backend.

use std::process::ExitCode;

use clap::Parser;
use dtopt::estimator::{probe, DEFAULT_EPSILON};
use dtopt_cli::AdapterArgs;

/// Probe integration-step counts to choose t_min, t_max and the t-value grid.
#[derive(Parser)]
#[command(name = "est-probe", version)]
struct Cli {
    #[command(flatten)]
    adapter: AdapterArgs,
    /// Relative tolerance of the linear-regime test.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Also print every t value, one per line.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    dtopt_cli::run("est-probe", || {
        let mut adapter = cli.adapter.build()?;
        let p = probe(&mut adapter, cli.epsilon)?;
        println!(
            "t_min={} t_max={} epsilon={} size={}",
            p.t_min(),
            p.t_max(),
            p.epsilon,
            p.grid.len()
        );
        if cli.list {
            for t in p.grid.values() {
                println!("{t}");
            }
        }
        Ok(())
    })
}
