//! Computes the load labels of a sorted unique DT file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dtopt::compute_load_labels;

/// Write one load label per trace of a sorted dataset.
#[derive(Parser)]
#[command(name = "dt-label", version)]
struct Cli {
    input: PathBuf,
    h: usize,
    /// Buffer size in bytes.
    b: usize,
    output: PathBuf,
    /// Skip the lexicographic-order check (duplicates are still rejected).
    #[arg(long)]
    trusted: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    dtopt_cli::run("dt-label", || {
        let h = dtopt_cli::horizon(cli.h)?;
        dtopt::SortBudget::new(cli.b).records_per_buffer(h)?;
        compute_load_labels(&cli.input, &cli.output, h, cli.b, !cli.trusted)?;
        Ok(())
    })
}
