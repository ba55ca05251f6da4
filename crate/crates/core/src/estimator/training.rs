//! The training campaign `C*` and sample collection.
//!
//! `C*` follows a single trajectory that is stored after every run and
//! reloaded at the start of the next line:
//!
//! ```text
//! L0 I d1 R k1 S1
//! L1 I d2 R k2 S2
//! F1 L2 I d3 R k3 S3
//! ...
//! F(n-1) Ln [I d R1]... R1
//! Fn
//! ```
//!
//! Run lengths are grid units (multiples of `t_min`), so the campaign's
//! interval length is `t_min`. Every label is stored, loaded and freed
//! exactly once. Disturbances beyond the `n`-th are injected on the last
//! line, each followed by a unit run.

use crate::adapter::{SimAdapter, SimOp, TimedSample};
use crate::campaign::{Campaign, CampaignLine, SimCommand};
use crate::error::{Error, Result};

use super::grid::TGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingCampaign {
    pub campaign: Campaign,
    /// Horizon of the single scenario the campaign simulates.
    pub horizon: u64,
    /// Interval length exponent: one interval is `10^unit_exponent`.
    pub unit_exponent: i32,
}

impl TrainingCampaign {
    /// Maps a campaign command to the backend operation it stands for.
    pub fn op(&self, cmd: SimCommand) -> SimOp {
        match cmd {
            SimCommand::Run(k) => SimOp::Run(super::grid::scaled(k, self.unit_exponent)),
            SimCommand::Inject(d) => SimOp::Inject(d),
            SimCommand::Store(x) => SimOp::Store(x),
            SimCommand::Load(x) => SimOp::Load(x),
            SimCommand::Free(x) => SimOp::Free(x),
        }
    }
}

pub fn build_training_campaign(grid: &TGrid, disturbances: &[u64]) -> Result<TrainingCampaign> {
    training_campaign_from_units(grid.units(), grid.unit_exponent(), disturbances)
}

/// `C*` for arbitrary run lengths `units`, each worth `10^unit_exponent`.
pub fn training_campaign_from_units(
    units: &[u64],
    unit_exponent: i32,
    disturbances: &[u64],
) -> Result<TrainingCampaign> {
    if units.is_empty() || units.contains(&0) {
        return Err(Error::Invalid(
            "run lengths must be non-empty and positive".into(),
        ));
    }
    if disturbances.is_empty() {
        return Err(Error::Invalid("empty disturbance set".into()));
    }
    if disturbances.contains(&0) {
        return Err(Error::Invalid("disturbance codes must be positive".into()));
    }
    use SimCommand::*;
    let n = units.len() as u64;
    let mut lines = Vec::with_capacity(units.len() + 2);
    let mut horizon = 0u64;

    for (idx, &k) in units.iter().enumerate() {
        let m = idx as u64 + 1;
        let mut cmds = Vec::with_capacity(5);
        if m >= 3 {
            cmds.push(Free(m - 2));
        }
        cmds.push(Load(m - 1));
        if let Some(&d) = disturbances.get(idx) {
            cmds.push(Inject(d));
        }
        cmds.push(Run(k));
        cmds.push(Store(m));
        horizon += k;
        lines.push(CampaignLine::new(cmds)?);
    }

    let mut last = Vec::new();
    if n >= 2 {
        last.push(Free(n - 1));
    }
    last.push(Load(n));
    let leftover = disturbances.get(units.len()..).unwrap_or(&[]);
    for &d in leftover {
        last.push(Inject(d));
        last.push(Run(1));
    }
    if leftover.is_empty() {
        last.push(Run(1));
    }
    horizon += leftover.len().max(1) as u64;
    lines.push(CampaignLine::new(last)?);
    lines.push(CampaignLine::new(vec![Free(n)])?);

    Ok(TrainingCampaign {
        campaign: Campaign { lines },
        horizon,
        unit_exponent,
    })
}

/// Executes `C*` through the adapter `repetitions` times.
pub fn collect_samples(
    adapter: &mut impl SimAdapter,
    training: &TrainingCampaign,
    repetitions: usize,
) -> Result<Vec<TimedSample>> {
    if repetitions == 0 {
        return Err(Error::Invalid("repetitions must be at least 1".into()));
    }
    let per_pass = training.campaign.commands().count();
    let mut out = Vec::with_capacity(per_pass * repetitions);
    for _ in 0..repetitions {
        for cmd in training.campaign.commands() {
            out.push(adapter.measure(&training.op(cmd))?);
        }
    }
    Ok(out)
}
