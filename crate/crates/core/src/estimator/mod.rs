//! Campaign runtime estimation.
//!
//! Probe the step counts to choose a sampling grid, run the training
//! campaign through an adapter, fit the prediction model and check it on
//! fresh draws.

pub mod fit;
pub mod grid;
pub mod model;
pub mod predict;
pub mod probe;
pub mod training;
pub mod validate;

pub use fit::{fit, fit_run, fit_with, objective, run_cost, RunFit};
pub use grid::{build_t, TGrid};
pub use model::PredictionModel;
pub use predict::{predict_campaign, predict_command, predict_lines};
pub use probe::{find_t_max, find_t_min, DEFAULT_EPSILON};
pub use training::{build_training_campaign, collect_samples, TrainingCampaign};
pub use validate::{validate, ValidationReport};

use crate::adapter::{SimAdapter, TimedSample};
use crate::error::Result;
use crate::par::Parallelism;

pub const DEFAULT_REPETITIONS: usize = 5;

/// Outcome of probing.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub grid: TGrid,
    pub epsilon: f64,
}

impl ProbeResult {
    pub fn t_min(&self) -> f64 {
        probe::decade(self.grid.exponents().0)
    }

    pub fn t_max(&self) -> f64 {
        probe::decade(self.grid.exponents().1)
    }
}

pub fn probe(adapter: &mut impl SimAdapter, epsilon: f64) -> Result<ProbeResult> {
    let a = find_t_min(adapter)?;
    let b = find_t_max(adapter, a, epsilon)?;
    Ok(ProbeResult {
        grid: TGrid::from_exponents(a, b)?,
        epsilon,
    })
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub epsilon: f64,
    pub repetitions: usize,
    pub seed: u64,
    pub parallelism: Parallelism,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            epsilon: DEFAULT_EPSILON,
            repetitions: DEFAULT_REPETITIONS,
            seed: validate::DEFAULT_SEED,
            parallelism: Parallelism::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Training {
    pub probe: ProbeResult,
    pub campaign: TrainingCampaign,
    pub samples: Vec<TimedSample>,
    pub model: PredictionModel,
}

/// Probe, build `C*`, collect samples and fit.
pub fn train(
    adapter: &mut impl SimAdapter,
    disturbances: &[u64],
    opts: &TrainOptions,
) -> Result<Training> {
    let probe = probe(adapter, opts.epsilon)?;
    let campaign = build_training_campaign(&probe.grid, disturbances)?;
    let samples = collect_samples(adapter, &campaign, opts.repetitions)?;
    let mut model = fit_with(&samples, opts.parallelism)?;
    model.t_min = Some(probe.t_min());
    model.t_max = Some(probe.t_max());
    model.epsilon = Some(opts.epsilon);
    model.seed = Some(opts.seed);
    Ok(Training {
        probe,
        campaign,
        samples,
        model,
    })
}
