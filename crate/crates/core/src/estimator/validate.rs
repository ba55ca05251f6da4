//! Held-out validation of the run-cost model.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adapter::{SimAdapter, SimOp};
use crate::error::{Error, Result};

use super::model::PredictionModel;

pub const DEFAULT_SETS: usize = 100;
pub const DEFAULT_SEED: u64 = 42;
const BINS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `BINS + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Mean relative error of each validation set.
    pub set_errors: Vec<f64>,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub stddev: f64,
    pub histogram: Histogram,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "sets={} mean={:.4}% min={:.4}% max={:.4}% stddev={:.4}%",
            self.set_errors.len(),
            100.0 * self.mean,
            100.0 * self.min,
            100.0 * self.max,
            100.0 * self.stddev
        )?;
        let h = &self.histogram;
        for (i, c) in h.counts.iter().enumerate() {
            writeln!(
                f,
                "  [{:.4}%, {:.4}%] {c}",
                100.0 * h.edges[i],
                100.0 * h.edges[i + 1]
            )?;
        }
        Ok(())
    }
}

fn histogram(values: &[f64], lo: f64, hi: f64) -> Histogram {
    let width = (hi - lo) / BINS as f64;
    let edges = (0..=BINS).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0; BINS];
    for &v in values {
        let i = if width > 0.0 {
            (((v - lo) / width) as usize).min(BINS - 1)
        } else {
            0
        };
        counts[i] += 1;
    }
    Histogram { edges, counts }
}

/// Draws `t'` log-uniformly from `[t/10, 10t]`.
pub fn draw_t(rng: &mut impl Rng, t: f64) -> f64 {
    let u: f64 = rng.random();
    t * 10f64.powf(2.0 * u - 1.0)
}

/// Builds `sets` validation sets, each with one `t'` per grid value,
/// measures them through the adapter and aggregates the per-set mean
/// relative errors `|τ - run_S(t')| / τ`.
pub fn validate(
    adapter: &mut impl SimAdapter,
    model: &PredictionModel,
    t_values: &[f64],
    sets: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if sets == 0 {
        return Err(Error::Invalid("need at least one validation set".into()));
    }
    if t_values.is_empty() {
        return Err(Error::Invalid("no t values to validate".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set_errors = Vec::with_capacity(sets);
    for _ in 0..sets {
        let mut sum = 0.0;
        for &t in t_values {
            let tp = draw_t(&mut rng, t);
            let tau = adapter.measure(&SimOp::Run(tp))?.elapsed;
            sum += (tau - model.run_time(tp)).abs() / tau;
        }
        set_errors.push(sum / t_values.len() as f64);
    }
    let n = set_errors.len() as f64;
    let mean = set_errors.iter().sum::<f64>() / n;
    let min = set_errors.iter().copied().fold(f64::INFINITY, f64::min);
    let max = set_errors.iter().copied().fold(0.0, f64::max);
    let stddev = if set_errors.len() > 1 {
        (set_errors
            .iter()
            .map(|e| (e - mean) * (e - mean))
            .sum::<f64>()
            / (n - 1.0))
            .sqrt()
    } else {
        0.0
    };
    let histogram = histogram(&set_errors, min, max);
    Ok(ValidationReport {
        set_errors,
        mean,
        min,
        max,
        stddev,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapter::{SyntheticAdapter, SyntheticConfig};

    #[test]
    fn draws_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let v = draw_t(&mut rng, 3.0);
            assert!((0.3..=30.0).contains(&v));
        }
    }

    #[test]
    fn exact_model_has_zero_error() {
        let cfg = SyntheticConfig::default();
        let (a, b, g) = cfg.planted();
        let mut ad = SyntheticAdapter::new(cfg).unwrap();
        let m = PredictionModel::run_only(a, b, g);
        let r = validate(&mut ad, &m, &[0.1, 1.0, 10.0], 5, 3).unwrap();
        // step counts are rounded, so the error is small but not zero
        assert!(r.max < 2e-3, "{r}");
        assert_eq!(r.histogram.counts.iter().sum::<usize>(), 5);
    }

    #[test]
    fn seeded() {
        let cfg = SyntheticConfig {
            noise: 0.05,
            ..Default::default()
        };
        let (a, b, g) = cfg.planted();
        let m = PredictionModel::run_only(a, b, g);
        let run = || {
            let mut ad = SyntheticAdapter::new(cfg.clone()).unwrap();
            validate(&mut ad, &m, &[0.5, 5.0], 4, 9).unwrap()
        };
        assert_eq!(run(), run());
    }
}
