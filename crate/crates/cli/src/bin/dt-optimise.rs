//! Prints the optimised campaign for a sorted dataset.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dtopt::generate_campaign;

/// Emit the optimised simulation campaign on standard output.
#[derive(Parser)]
#[command(name = "dt-optimise", version)]
struct Cli {
    /// Sorted unique dataset.
    sorted: PathBuf,
    /// Load labels from dt-label.
    ll: PathBuf,
    /// Sorted unique store labels.
    sl: PathBuf,
    h: usize,
    /// Buffer size in bytes.
    b: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    dtopt_cli::run("dt-optimise", || {
        let h = dtopt_cli::horizon(cli.h)?;
        dtopt::SortBudget::new(cli.b).records_per_buffer(h)?;
        let stdout = std::io::stdout().lock();
        let stats = generate_campaign(&cli.sorted, &cli.ll, &cli.sl, h, cli.b, stdout)?;
        eprintln!(
            "traces={} {} loads={} stores={} frees={} injects={}",
            stats.traces,
            stats.compression(),
            stats.loads,
            stats.stores,
            stats.frees,
            stats.injects
        );
        Ok(())
    })
}
