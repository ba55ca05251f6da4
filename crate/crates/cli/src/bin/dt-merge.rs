//! Merges two lex-ordered DT files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dtopt::{merge_pair, SortBudget};

/// Merge two sorted files of disturbance traces.
#[derive(Parser)]
#[command(name = "dt-merge", version)]
struct Cli {
    first: PathBuf,
    second: PathBuf,
    h: usize,
    /// Buffer size in bytes.
    b: usize,
    output: PathBuf,
    /// Write equal traces once.
    #[arg(long)]
    unique: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    dtopt_cli::run("dt-merge", || {
        let h = dtopt_cli::horizon(cli.h)?;
        merge_pair(
            &cli.first,
            &cli.second,
            &cli.output,
            h,
            &SortBudget::new(cli.b),
            cli.unique,
        )?;
        Ok(())
    })
}
