//! Compression statistics of a campaign read from standard input.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dtopt::dtfile::record_count;
use dtopt::optimise::Compression;
use dtopt::{CampaignReader, SimCommand};

/// Print SIM_D, SIM_C and their ratio for a campaign on standard input.
#[derive(Parser)]
#[command(name = "campaign-stats", version)]
struct Cli {
    /// Dataset the campaign was generated from.
    dataset: PathBuf,
    h: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    dtopt_cli::run("campaign-stats", || {
        let h = dtopt_cli::horizon(cli.h)?;
        let traces = record_count(&cli.dataset, h)?;
        let mut counts = [0u64; 5];
        let mut sim_c = 0;
        for line in CampaignReader::new(std::io::stdin().lock()) {
            for &c in line?.commands() {
                let slot = match c {
                    SimCommand::Load(_) => 0,
                    SimCommand::Store(_) => 1,
                    SimCommand::Free(_) => 2,
                    SimCommand::Inject(_) => 3,
                    SimCommand::Run(t) => {
                        sim_c += t;
                        4
                    }
                };
                counts[slot] += 1;
            }
        }
        let c = Compression {
            sim_d: traces * h.get() as u64,
            sim_c,
        };
        println!("{c}");
        println!(
            "traces={traces} loads={} stores={} frees={} injects={} runs={}",
            counts[0], counts[1], counts[2], counts[3], counts[4]
        );
        Ok(())
    })
}
