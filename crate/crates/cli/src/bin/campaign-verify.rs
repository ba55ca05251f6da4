//! Replays a campaign and checks it against a dataset.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use dtopt::dtfile::{RecordReader, DEFAULT_BUFFER_BYTES};
use dtopt::vm::{Verifier, DEFAULT_TRIE_LIMIT};
use dtopt::CampaignReader;

/// Verify that a campaign simulates exactly the traces of a sorted dataset.
///
/// The report goes to standard error, a one-line summary to standard output.
/// Exit status is 0 only if every check passes.
#[derive(Parser)]
#[command(name = "campaign-verify", version)]
struct Cli {
    /// Sorted unique dataset.
    dataset: PathBuf,
    /// Campaign text ("-" for standard input).
    campaign: PathBuf,
    h: usize,
    /// Largest dataset (in traces) for the in-memory prefix count.
    #[arg(long, default_value_t = DEFAULT_TRIE_LIMIT)]
    trie_limit: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut passed = false;
    let code = dtopt_cli::run("campaign-verify", || {
        let h = dtopt_cli::horizon(cli.h)?;
        let mut data = RecordReader::open(&cli.dataset, h, DEFAULT_BUFFER_BYTES)?;
        let mut v = Verifier::new(h, cli.trie_limit);
        if data.len() > cli.trie_limit {
            v.skip_prefix_check();
        }
        let input: Box<dyn std::io::BufRead> = if cli.campaign.as_os_str() == "-" {
            Box::new(std::io::stdin().lock())
        } else {
            let f =
                File::open(&cli.campaign).with_context(|| cli.campaign.display().to_string())?;
            Box::new(BufReader::new(f))
        };
        let mut parse_error = None;
        for line in CampaignReader::new(input) {
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    parse_error = Some(e);
                    break;
                }
            };
            if v.backlog() == 0 {
                if let Some(rec) = data.next_record()? {
                    v.expect(rec);
                }
            }
            v.feed(&line);
        }
        while let Some(rec) = data.next_record()? {
            v.expect(rec);
        }
        if let Some(e) = parse_error {
            return Err(e.into());
        }
        let report = v.finish();
        eprint!("{report}");
        println!("{}", report.summary());
        passed = report.passed();
        Ok(())
    });
    if code == ExitCode::SUCCESS && !passed {
        return ExitCode::from(1);
    }
    code
}
