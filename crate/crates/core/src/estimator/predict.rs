//! Campaign runtime prediction.

use std::io::BufRead;

use crate::adapter::SimOp;
use crate::campaign::{CampaignLine, CampaignReader, SimCommand};
use crate::error::Result;

use super::fit::run_cost;
use super::model::PredictionModel;

impl PredictionModel {
    pub fn run_time(&self, t: f64) -> f64 {
        run_cost(self.alpha, self.beta, self.gamma, t)
    }

    pub fn op_time(&self, op: &SimOp) -> f64 {
        match *op {
            SimOp::Run(t) => self.run_time(t),
            SimOp::Inject(_) => self.const_inject,
            SimOp::Store(_) => self.const_store,
            SimOp::Load(_) => self.const_load,
            SimOp::Free(_) => self.const_free,
        }
    }
}

/// Predicted seconds for one command. `Run(k)` covers `k·tau` time units.
pub fn predict_command(model: &PredictionModel, cmd: SimCommand, tau: f64) -> f64 {
    match cmd {
        SimCommand::Run(k) => model.run_time(k as f64 * tau),
        SimCommand::Inject(_) => model.const_inject,
        SimCommand::Store(_) => model.const_store,
        SimCommand::Load(_) => model.const_load,
        SimCommand::Free(_) => model.const_free,
    }
}

/// Sum over in-memory lines.
pub fn predict_lines<'a>(
    model: &PredictionModel,
    lines: impl IntoIterator<Item = &'a CampaignLine>,
    tau: f64,
) -> f64 {
    lines
        .into_iter()
        .flat_map(|l| l.commands())
        .map(|&c| predict_command(model, c, tau))
        .sum()
}

/// Streaming sum over campaign text.
pub fn predict_campaign(model: &PredictionModel, input: impl BufRead, tau: f64) -> Result<f64> {
    let mut total = 0.0;
    for line in CampaignReader::new(input) {
        for &c in line?.commands() {
            total += predict_command(model, c, tau);
        }
    }
    Ok(total)
}
