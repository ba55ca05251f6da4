//! Simulator backends used by the estimator.
//!
//! An adapter answers two questions: how many integration steps a run of
//! `t` takes, and how long a command takes to execute. The synthetic backend
//! computes both from a closed form; the recorded backend replays a sample
//! file.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};

/// `S = (σ, M, D_M, μ)` plus the interval length `τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSetting {
    pub adapter: String,
    pub model: String,
    pub disturbances: Vec<u64>,
    pub machine: String,
    /// Simulation seconds per interval.
    pub tau: f64,
}

impl SimulationSetting {
    pub fn new(
        adapter: impl Into<String>,
        model: impl Into<String>,
        disturbances: Vec<u64>,
        machine: impl Into<String>,
        tau: f64,
    ) -> Result<Self> {
        let s = SimulationSetting {
            adapter: adapter.into(),
            model: model.into(),
            disturbances,
            machine: machine.into(),
            tau,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.disturbances.is_empty() {
            return Err(Error::Config("disturbance set is empty".into()));
        }
        if self.disturbances.contains(&0) {
            return Err(Error::Config("disturbance codes must be positive".into()));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!(
                "interval length {} is not positive",
                self.tau
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CommandKind {
    Run,
    Inject,
    Store,
    Load,
    Free,
}

impl CommandKind {
    pub const ALL: [CommandKind; 5] = [
        CommandKind::Run,
        CommandKind::Inject,
        CommandKind::Store,
        CommandKind::Load,
        CommandKind::Free,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Run => "run",
            CommandKind::Inject => "inject",
            CommandKind::Store => "store",
            CommandKind::Load => "load",
            CommandKind::Free => "free",
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CommandKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CommandKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown command kind {s:?}")))
    }
}

/// A command as seen by a backend. `Run` carries `t` in simulation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimOp {
    Run(f64),
    Inject(u64),
    Store(u64),
    Load(u64),
    Free(u64),
}

impl SimOp {
    pub fn kind(&self) -> CommandKind {
        match self {
            SimOp::Run(_) => CommandKind::Run,
            SimOp::Inject(_) => CommandKind::Inject,
            SimOp::Store(_) => CommandKind::Store,
            SimOp::Load(_) => CommandKind::Load,
            SimOp::Free(_) => CommandKind::Free,
        }
    }

    pub fn t(&self) -> Option<f64> {
        match *self {
            SimOp::Run(t) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for SimOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SimOp::Run(t) => write!(f, "run({t})"),
            SimOp::Inject(x) | SimOp::Store(x) | SimOp::Load(x) | SimOp::Free(x) => {
                write!(f, "{}({x})", self.kind())
            }
        }
    }
}

/// One timing measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedSample {
    pub kind: CommandKind,
    pub t: Option<f64>,
    pub elapsed: f64,
}

pub trait SimAdapter {
    /// Integration steps the solver takes for a run of `t`.
    fn step_count(&mut self, t: f64) -> Result<u64>;

    /// Executes a command, returning elapsed seconds.
    fn execute(&mut self, op: &SimOp) -> Result<f64>;

    /// Executes and records a sample.
    fn measure(&mut self, op: &SimOp) -> Result<TimedSample> {
        let elapsed = self.execute(op)?;
        if !(elapsed > 0.0 && elapsed.is_finite()) {
            return Err(Error::Adapter {
                context: op.to_string(),
                detail: format!("non-positive elapsed time {elapsed}"),
            });
        }
        Ok(TimedSample {
            kind: op.kind(),
            t: op.t(),
            elapsed,
        })
    }
}

impl<A: SimAdapter + ?Sized> SimAdapter for &mut A {
    fn step_count(&mut self, t: f64) -> Result<u64> {
        (**self).step_count(t)
    }

    fn execute(&mut self, op: &SimOp) -> Result<f64> {
        (**self).execute(op)
    }
}

impl<A: SimAdapter + ?Sized> SimAdapter for Box<A> {
    fn step_count(&mut self, t: f64) -> Result<u64> {
        (**self).step_count(t)
    }

    fn execute(&mut self, op: &SimOp) -> Result<f64> {
        (**self).execute(op)
    }
}

fn check_t(t: f64, context: impl FnOnce() -> String) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Adapter {
            context: context(),
            detail: format!("t = {t} is not positive"),
        })
    }
}

/// Parameters of the synthetic backend. Every key is optional in TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    /// Step count on the plateau.
    pub n0: u64,
    /// End of the plateau.
    pub t_b: f64,
    /// Steps per unit of `t` past the plateau.
    pub slope: f64,
    pub c_fixed: f64,
    pub c_step: f64,
    pub const_inject: f64,
    pub const_store: f64,
    pub const_load: f64,
    pub const_free: f64,
    /// Sigma of the multiplicative lognormal noise; 0 disables it.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n0: 120,
            t_b: 0.4,
            slope: 500.0,
            c_fixed: 0.3,
            c_step: 0.00075,
            const_inject: 0.002,
            const_store: 0.05,
            const_load: 0.04,
            const_free: 0.001,
            noise: 0.0,
            seed: 42,
        }
    }
}

impl SyntheticConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SyntheticConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_toml(&std::fs::read_to_string(path).at(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t_b", self.t_b),
            ("slope", self.slope),
            ("c_fixed", self.c_fixed),
            ("c_step", self.c_step),
            ("const_inject", self.const_inject),
            ("const_store", self.const_store),
            ("const_load", self.const_load),
            ("const_free", self.const_free),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n0 == 0 {
            return Err(Error::Config("n0 must be positive".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config(format!(
                "noise must be non-negative, got {}",
                self.noise
            )));
        }
        Ok(())
    }

    /// Noiseless step count.
    pub fn steps(&self, t: f64) -> u64 {
        if t <= self.t_b {
            self.n0
        } else {
            (self.n0 as f64 + self.slope * (t - self.t_b)).round() as u64
        }
    }

    /// Noiseless execution time of a command.
    pub fn mean_time(&self, op: &SimOp) -> f64 {
        match *op {
            SimOp::Run(t) => self.c_fixed + self.c_step * self.steps(t) as f64,
            SimOp::Inject(_) => self.const_inject,
            SimOp::Store(_) => self.const_store,
            SimOp::Load(_) => self.const_load,
            SimOp::Free(_) => self.const_free,
        }
    }

    /// The run-cost function this backend plants, as `(α, β, γ)`.
    pub fn planted(&self) -> (f64, f64, f64) {
        (
            self.c_fixed + self.c_step * self.n0 as f64,
            self.c_step * self.slope,
            self.t_b,
        )
    }
}

/// Closed-form backend with optional lognormal noise.
#[derive(Debug, Clone)]
pub struct SyntheticAdapter {
    cfg: SyntheticConfig,
    noise: Option<LogNormal<f64>>,
    rng: ChaCha8Rng,
}

impl SyntheticAdapter {
    pub fn new(cfg: SyntheticConfig) -> Result<Self> {
        cfg.validate()?;
        let noise = if cfg.noise > 0.0 {
            Some(LogNormal::new(0.0, cfg.noise).map_err(|e| Error::Config(e.to_string()))?)
        } else {
            None
        };
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(SyntheticAdapter { cfg, noise, rng })
    }

    pub fn config(&self) -> &SyntheticConfig {
        &self.cfg
    }
}

impl SimAdapter for SyntheticAdapter {
    fn step_count(&mut self, t: f64) -> Result<u64> {
        check_t(t, || format!("step_count({t})"))?;
        Ok(self.cfg.steps(t))
    }

    fn execute(&mut self, op: &SimOp) -> Result<f64> {
        if let SimOp::Run(t) = *op {
            check_t(t, || op.to_string())?;
        }
        let base = self.cfg.mean_time(op);
        Ok(match &self.noise {
            Some(n) => base * n.sample(&mut self.rng),
            None => base,
        })
    }
}

/// Key used to match `t` values read from text against computed ones.
fn t_key(t: f64) -> String {
    format!("{t:.12e}")
}

#[derive(Debug, Default, Clone)]
struct Cycle {
    values: Vec<f64>,
    next: usize,
}

impl Cycle {
    fn take(&mut self) -> Option<f64> {
        let v = *self.values.get(self.next)?;
        self.next = (self.next + 1) % self.values.len();
        Some(v)
    }
}

/// Replays timings from a sample file.
///
/// Lines are `<kind> <t-or-dash> <elapsed>` for timings and
/// `steps <t> <count>` for step counts. Blank lines and `#` comments are
/// ignored. Each `(kind, t)` query returns the next recorded value for that
/// key, wrapping around at the end.
#[derive(Debug, Default, Clone)]
pub struct RecordedAdapter {
    timings: HashMap<(CommandKind, Option<String>), Cycle>,
    steps: HashMap<String, u64>,
}

impl RecordedAdapter {
    pub fn parse(input: impl BufRead) -> Result<Self> {
        let mut a = RecordedAdapter::default();
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Config(format!("sample file: {e}")))?;
            let n = idx + 1;
            let text = line.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let fields: Vec<&str> = text.split_whitespace().collect();
            let bad = |why: &str| Error::Config(format!("sample file line {n}: {why}"));
            if fields.len() != 3 {
                return Err(bad("expected three fields"));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v > 0.0)
                    .ok_or_else(|| bad(&format!("{s:?} is not a positive number")))
            };
            if fields[0] == "steps" {
                let t = num(fields[1])?;
                let c: u64 = fields[2]
                    .parse()
                    .map_err(|_| bad("step count is not an integer"))?;
                a.steps.insert(t_key(t), c);
                continue;
            }
            let kind: CommandKind = fields[0].parse().map_err(|_| bad("unknown command kind"))?;
            let t = match (kind, fields[1]) {
                (CommandKind::Run, "-") => return Err(bad("run sample needs a t value")),
                (CommandKind::Run, s) => Some(t_key(num(s)?)),
                (_, "-") => None,
                _ => return Err(bad("only run samples carry a t value")),
            };
            let elapsed = num(fields[2])?;
            a.timings.entry((kind, t)).or_default().values.push(elapsed);
        }
        Ok(a)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).at(path)?;
        Self::parse(std::io::BufReader::new(f))
    }
}

impl SimAdapter for RecordedAdapter {
    fn step_count(&mut self, t: f64) -> Result<u64> {
        self.steps
            .get(&t_key(t))
            .copied()
            .ok_or_else(|| Error::Adapter {
                context: format!("step_count({t})"),
                detail: "no recorded step count".into(),
            })
    }

    fn execute(&mut self, op: &SimOp) -> Result<f64> {
        let key = (op.kind(), op.t().map(t_key));
        self.timings
            .get_mut(&key)
            .and_then(Cycle::take)
            .ok_or_else(|| Error::Adapter {
                context: op.to_string(),
                detail: "no recorded sample".into(),
            })
    }
}

/// Wraps an adapter and keeps every step count and sample it produces, so
/// a session can be saved and replayed with [`RecordedAdapter`].
#[derive(Debug)]
pub struct Recorder<A> {
    inner: A,
    pub steps: Vec<(f64, u64)>,
    pub samples: Vec<TimedSample>,
}

impl<A: SimAdapter> Recorder<A> {
    pub fn new(inner: A) -> Self {
        Recorder {
            inner,
            steps: Vec::new(),
            samples: Vec::new(),
        }
    }

    pub fn into_inner(self) -> A {
        self.inner
    }

    /// Writes the session in the recorded-backend format.
    pub fn write(&self, mut out: impl Write) -> std::io::Result<()> {
        write_steps(&mut out, &self.steps)?;
        write_samples(&mut out, &self.samples)
    }
}

impl<A: SimAdapter> SimAdapter for Recorder<A> {
    fn step_count(&mut self, t: f64) -> Result<u64> {
        let n = self.inner.step_count(t)?;
        self.steps.push((t, n));
        Ok(n)
    }

    fn execute(&mut self, op: &SimOp) -> Result<f64> {
        let e = self.inner.execute(op)?;
        self.samples.push(TimedSample {
            kind: op.kind(),
            t: op.t(),
            elapsed: e,
        });
        Ok(e)
    }
}

/// Writes samples in the recorded-backend format.
pub fn write_samples<'a>(
    mut out: impl Write,
    samples: impl IntoIterator<Item = &'a TimedSample>,
) -> std::io::Result<()> {
    for s in samples {
        match s.t {
            Some(t) => writeln!(out, "{} {t} {}", s.kind, s.elapsed)?,
            None => writeln!(out, "{} - {}", s.kind, s.elapsed)?,
        }
    }
    Ok(())
}

/// Writes step counts as `steps` lines.
pub fn write_steps(mut out: impl Write, steps: &[(f64, u64)]) -> std::io::Result<()> {
    for (t, n) in steps {
        writeln!(out, "steps {t} {n}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_tb1() -> SyntheticConfig {
        SyntheticConfig {
            t_b: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn synthetic_step_count() {
        let mut a = SyntheticAdapter::new(cfg_tb1()).unwrap();
        assert_eq!(a.step_count(0.5).unwrap(), 120);
        assert_eq!(a.step_count(3.0).unwrap(), 1120);
        assert_eq!(a.step_count(3.0).unwrap(), a.step_count(3.0).unwrap());
        assert!(a.step_count(0.0).is_err());
    }

    #[test]
    fn synthetic_run_time() {
        let mut a = SyntheticAdapter::new(cfg_tb1()).unwrap();
        assert!((a.execute(&SimOp::Run(0.5)).unwrap() - 0.39).abs() < 1e-12);
        assert_eq!(a.execute(&SimOp::Load(3)).unwrap(), 0.04);
    }

    #[test]
    fn synthetic_noise_is_seeded() {
        let cfg = SyntheticConfig {
            noise: 0.05,
            ..Default::default()
        };
        let run = |cfg: &SyntheticConfig| {
            let mut a = SyntheticAdapter::new(cfg.clone()).unwrap();
            (0..5)
                .map(|_| a.execute(&SimOp::Run(2.0)).unwrap())
                .collect::<Vec<_>>()
        };
        let x = run(&cfg);
        assert_eq!(x, run(&cfg));
        assert!(x.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn config_from_toml() {
        let c = SyntheticConfig::from_toml("t_b = 1.0\nnoise = 0.05\n").unwrap();
        assert_eq!(c.t_b, 1.0);
        assert_eq!(c.n0, 120);
        assert!(SyntheticConfig::from_toml("bogus = 1\n").is_err());
        assert!(SyntheticConfig::from_toml("slope = -1.0\n").is_err());
    }

    #[test]
    fn recorded_cycles() {
        let text = "# header\nrun 0.3 1.5\nrun 0.3 2.5\nload - 0.1\nsteps 0.3 77\n";
        let mut a = RecordedAdapter::parse(text.as_bytes()).unwrap();
        let t = 0.1 * 3.0;
        assert_eq!(a.execute(&SimOp::Run(t)).unwrap(), 1.5);
        assert_eq!(a.execute(&SimOp::Run(t)).unwrap(), 2.5);
        assert_eq!(a.execute(&SimOp::Run(t)).unwrap(), 1.5);
        assert_eq!(a.execute(&SimOp::Load(9)).unwrap(), 0.1);
        assert_eq!(a.step_count(t).unwrap(), 77);
        assert!(a.execute(&SimOp::Run(0.4)).is_err());
        assert!(a.execute(&SimOp::Free(1)).is_err());
    }

    #[test]
    fn recorded_rejects_bad_lines() {
        for bad in ["run - 1.0", "load 0.5 1.0", "run 1 -2", "jump - 1", "run 1"] {
            assert!(RecordedAdapter::parse(bad.as_bytes()).is_err(), "{bad}");
        }
    }

    #[test]
    fn samples_round_trip() {
        let s = vec![
            TimedSample {
                kind: CommandKind::Run,
                t: Some(0.04),
                elapsed: 0.5,
            },
            TimedSample {
                kind: CommandKind::Store,
                t: None,
                elapsed: 0.25,
            },
        ];
        let mut buf = Vec::new();
        write_samples(&mut buf, &s).unwrap();
        let mut a = RecordedAdapter::parse(buf.as_slice()).unwrap();
        assert_eq!(a.measure(&SimOp::Run(0.04)).unwrap(), s[0]);
        assert_eq!(a.measure(&SimOp::Store(1)).unwrap(), s[1]);
    }

    #[test]
    fn recorder_replays() {
        let cfg = SyntheticConfig {
            noise: 0.1,
            ..Default::default()
        };
        let mut r = Recorder::new(SyntheticAdapter::new(cfg).unwrap());
        let n = r.step_count(2.0).unwrap();
        let a = r.execute(&SimOp::Run(2.0)).unwrap();
        let b = r.execute(&SimOp::Inject(3)).unwrap();
        let mut buf = Vec::new();
        r.write(&mut buf).unwrap();
        let mut rec = RecordedAdapter::parse(buf.as_slice()).unwrap();
        assert_eq!(rec.step_count(2.0).unwrap(), n);
        assert_eq!(rec.execute(&SimOp::Run(2.0)).unwrap(), a);
        assert_eq!(rec.execute(&SimOp::Inject(1)).unwrap(), b);
    }

    #[test]
    fn setting_validation() {
        assert!(SimulationSetting::new("synthetic", "m", vec![1, 2], "desk", 1.0).is_ok());
        assert!(SimulationSetting::new("synthetic", "m", vec![], "desk", 1.0).is_err());
        assert!(SimulationSetting::new("synthetic", "m", vec![0], "desk", 1.0).is_err());
        assert!(SimulationSetting::new("synthetic", "m", vec![1], "desk", 0.0).is_err());
    }
}
