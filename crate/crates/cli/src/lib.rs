//! Shared plumbing for the command-line tools.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Args;
use dtopt::adapter::{RecordedAdapter, SimAdapter, SyntheticAdapter, SyntheticConfig};
use dtopt::Horizon;

/// Runs a tool body. Errors go to stderr and exit with status 1; clap
/// handles usage errors itself with status 2.
pub fn run(tool: &str, body: impl FnOnce() -> anyhow::Result<()>) -> ExitCode {
    match body() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{tool}: error: {e:#}");
            ExitCode::from(1)
        }
    }
}

pub fn horizon(h: usize) -> anyhow::Result<Horizon> {
    Ok(Horizon::new(h)?)
}

#[derive(Debug, Clone, Args)]
pub struct AdapterArgs {
    /// Synthetic backend parameters as TOML (defaults apply to missing keys).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Replay timings from a recorded sample file instead of the synthetic backend.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["config", "noise", "adapter_seed"])]
    pub recorded: Option<PathBuf>,
    /// Lognormal noise sigma for the synthetic backend.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Noise seed for the synthetic backend.
    #[arg(long)]
    pub adapter_seed: Option<u64>,
}

impl AdapterArgs {
    pub fn synthetic_config(&self) -> anyhow::Result<SyntheticConfig> {
        let mut cfg = match &self.config {
            Some(p) => SyntheticConfig::load(p)?,
            None => SyntheticConfig::default(),
        };
        if let Some(n) = self.noise {
            cfg.noise = n;
        }
        if let Some(s) = self.adapter_seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn build(&self) -> anyhow::Result<Box<dyn SimAdapter>> {
        Ok(match &self.recorded {
            Some(p) => Box::new(RecordedAdapter::load(p)?),
            None => Box::new(SyntheticAdapter::new(self.synthetic_config()?)?),
        })
    }
}

/// Rejects an empty code list or one containing 0.
pub fn check_codes(codes: &[u64]) -> anyhow::Result<()> {
    if codes.is_empty() {
        bail!("need at least one disturbance code");
    }
    if codes.contains(&0) {
        bail!("disturbance codes must be positive");
    }
    Ok(())
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
