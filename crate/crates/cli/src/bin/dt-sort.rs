//! Sorts a DT file lexicographically under a fixed buffer budget.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dtopt::{sort_file, SortBudget};

/// Sort a file of disturbance traces.
#[derive(Parser)]
#[command(name = "dt-sort", version)]
struct Cli {
    input: PathBuf,
    /// Words per trace (1 for label files).
    h: usize,
    /// Buffer size in bytes.
    b: usize,
    output: PathBuf,
    /// Drop duplicate traces.
    #[arg(long)]
    unique: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    dtopt_cli::run("dt-sort", || {
        let h = dtopt_cli::horizon(cli.h)?;
        sort_file(
            &cli.input,
            &cli.output,
            h,
            &SortBudget::new(cli.b),
            cli.unique,
        )?;
        Ok(())
    })
}
