//! Symbolic replay of campaigns.
//!
//! The virtual simulator tracks, instead of model dynamics, the sequence of
//! disturbances that produced the current state. Replaying a campaign
//! therefore reconstructs the exact scenarios it simulates, which makes the
//! replayer an oracle for the whole optimisation pipeline.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::campaign::{CampaignLine, SimCommand};
use crate::trace::{DisturbanceTrace, Horizon};

/// State of the virtual simulator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VmState {
    pub prefix: Vec<u64>,
    pub pending: Option<u64>,
}

impl VmState {
    pub fn position(&self) -> usize {
        self.prefix.len()
    }
}

/// Where in the campaign a fault happened: 1-based line and command index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct At {
    pub line: usize,
    pub command: usize,
}

impl fmt::Display for At {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, command {}", self.line, self.command)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VmError {
    #[error("{at}: load of unknown label {label}")]
    LoadUnknown { at: At, label: u64 },
    #[error("{at}: free of unknown label {label}")]
    FreeUnknown { at: At, label: u64 },
    #[error("{at}: the initial state cannot be freed")]
    FreeInitial { at: At },
    #[error("{at}: store to live label {label}")]
    StoreCollision { at: At, label: u64 },
    #[error("{at}: second inject without an intervening run")]
    DoubleInject { at: At },
    #[error("{at}: run of {t} from position {position} passes horizon {horizon}")]
    RunPastHorizon {
        at: At,
        t: u64,
        position: usize,
        horizon: usize,
    },
    #[error("{at}: {command} with no active scenario")]
    NoActiveState { at: At, command: SimCommand },
    #[error("campaign ends mid-scenario at position {position}")]
    EndsMidScenario { position: usize },
    #[error("{count} stored labels never freed (smallest {first})")]
    LeakedLabels { count: usize, first: u64 },
}

/// Outcome of a full replay.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Replay {
    pub scenarios: Vec<DisturbanceTrace>,
    pub sim_intervals: u64,
    pub max_live_states: usize,
}

/// Incremental replayer. Feed lines, collect emitted scenarios through a
/// callback, then call [`Replayer::finish`].
#[derive(Debug)]
pub struct Replayer {
    h: usize,
    store: HashMap<u64, VmState>,
    active: Option<VmState>,
    line: usize,
    sim_intervals: u64,
    max_live: usize,
    emitted: u64,
}

impl Replayer {
    pub fn new(h: Horizon) -> Self {
        Replayer {
            h: h.get(),
            store: HashMap::new(),
            active: None,
            line: 0,
            sim_intervals: 0,
            max_live: 0,
            emitted: 0,
        }
    }

    pub fn sim_intervals(&self) -> u64 {
        self.sim_intervals
    }

    pub fn max_live_states(&self) -> usize {
        self.max_live
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    pub fn live_states(&self) -> usize {
        self.store.len()
    }

    /// Executes one line; `emit` receives every scenario completed by it.
    pub fn feed(
        &mut self,
        line: &CampaignLine,
        mut emit: impl FnMut(&[u64]),
    ) -> Result<(), VmError> {
        self.line += 1;
        for (k, &cmd) in line.commands().iter().enumerate() {
            let at = At {
                line: self.line,
                command: k + 1,
            };
            self.step(cmd, at, &mut emit)?;
        }
        Ok(())
    }

    fn active(&mut self, cmd: SimCommand, at: At) -> Result<&mut VmState, VmError> {
        self.active
            .as_mut()
            .ok_or(VmError::NoActiveState { at, command: cmd })
    }

    fn step(
        &mut self,
        cmd: SimCommand,
        at: At,
        emit: &mut impl FnMut(&[u64]),
    ) -> Result<(), VmError> {
        match cmd {
            SimCommand::Load(0) => {
                self.active = Some(VmState::default());
            }
            SimCommand::Load(label) => {
                let s = self
                    .store
                    .get(&label)
                    .ok_or(VmError::LoadUnknown { at, label })?;
                self.active = Some(s.clone());
            }
            SimCommand::Free(0) => return Err(VmError::FreeInitial { at }),
            SimCommand::Free(label) => {
                self.store
                    .remove(&label)
                    .ok_or(VmError::FreeUnknown { at, label })?;
            }
            SimCommand::Inject(d) => {
                let s = self.active(cmd, at)?;
                if s.pending.is_some() {
                    return Err(VmError::DoubleInject { at });
                }
                s.pending = Some(d);
            }
            SimCommand::Run(t) => {
                let h = self.h;
                let s = self.active(cmd, at)?;
                let position = s.position();
                if t == 0 || t > (h - position) as u64 {
                    return Err(VmError::RunPastHorizon {
                        at,
                        t,
                        position,
                        horizon: h,
                    });
                }
                s.prefix.push(s.pending.take().unwrap_or(0));
                s.prefix.resize(position + t as usize, 0);
                let done = s.prefix.len() == h;
                if done {
                    emit(&s.prefix);
                    self.emitted += 1;
                    self.active = None;
                }
                self.sim_intervals += t;
            }
            SimCommand::Store(label) => {
                if label == 0 || self.store.contains_key(&label) {
                    return Err(VmError::StoreCollision { at, label });
                }
                let snapshot = self.active(cmd, at)?.clone();
                self.store.insert(label, snapshot);
                self.max_live = self.max_live.max(self.store.len());
            }
        }
        Ok(())
    }

    /// Checks the end state: no scenario in flight and no live stored labels.
    pub fn finish(&self) -> Result<(), VmError> {
        if let Some(s) = &self.active {
            return Err(VmError::EndsMidScenario {
                position: s.position(),
            });
        }
        if let Some(&first) = self.store.keys().min() {
            return Err(VmError::LeakedLabels {
                count: self.store.len(),
                first,
            });
        }
        Ok(())
    }
}

/// Replays a whole campaign held in memory.
pub fn replay<'a>(
    lines: impl IntoIterator<Item = &'a CampaignLine>,
    h: Horizon,
) -> Result<Replay, VmError> {
    let mut vm = Replayer::new(h);
    let mut scenarios = Vec::new();
    for line in lines {
        vm.feed(line, |t| {
            scenarios.push(DisturbanceTrace::new(t.to_vec()).expect("horizon checked"))
        })?;
    }
    vm.finish()?;
    Ok(Replay {
        scenarios,
        sim_intervals: vm.sim_intervals,
        max_live_states: vm.max_live,
    })
}

/// Prefix trie used to count distinct non-empty prefixes of a dataset.
#[derive(Debug, Default)]
pub struct PrefixTrie {
    edges: HashMap<(u64, u64), u64>,
}

impl PrefixTrie {
    pub fn new() -> Self {
        PrefixTrie::default()
    }

    pub fn insert(&mut self, trace: &[u64]) {
        let mut node = 0;
        for &d in trace {
            let next = self.edges.len() as u64 + 1;
            node = *self.edges.entry((node, d)).or_insert(next);
        }
    }

    /// Distinct non-empty prefixes inserted so far (one per edge).
    pub fn prefix_count(&self) -> u64 {
        self.edges.len() as u64
    }
}

/// One named check in a verification report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Result of [`Verifier`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub traces: u64,
    pub sim_intervals: u64,
    pub max_live_states: usize,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One machine-readable line.
    pub fn summary(&self) -> String {
        format!(
            "{} checks={}/{} traces={} sim_c={} max_live={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len(),
            self.traces,
            self.sim_intervals,
            self.max_live_states
        )
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {}: {}",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Streaming verifier comparing a replayed campaign against a dataset.
///
/// Scenarios emitted by the replay are compared in order with the dataset
/// traces supplied through [`Verifier::expect`]. The prefix-once property is
/// checked with an in-memory trie while the dataset has at most
/// `trie_limit` traces.
pub struct Verifier {
    h: usize,
    vm: Replayer,
    vm_error: Option<VmError>,
    expected: std::collections::VecDeque<Vec<u64>>,
    trie: Option<PrefixTrie>,
    trie_limit: u64,
    dataset_traces: u64,
    matched: u64,
    mismatch: Option<String>,
}

/// Default bound on dataset size for the trie check.
pub const DEFAULT_TRIE_LIMIT: u64 = 100_000;

impl Verifier {
    pub fn new(h: Horizon, trie_limit: u64) -> Self {
        Verifier {
            h: h.get(),
            vm: Replayer::new(h),
            vm_error: None,
            expected: Default::default(),
            trie: Some(PrefixTrie::new()),
            trie_limit,
            dataset_traces: 0,
            matched: 0,
            mismatch: None,
        }
    }

    /// Drops the prefix-once check, for datasets known to exceed the limit.
    pub fn skip_prefix_check(&mut self) {
        self.trie = None;
    }

    /// Supplies the next dataset trace.
    pub fn expect(&mut self, trace: &[u64]) {
        self.dataset_traces += 1;
        if self.dataset_traces > self.trie_limit {
            self.trie = None;
        }
        if let Some(t) = &mut self.trie {
            t.insert(trace);
        }
        if self.mismatch.is_none() {
            self.expected.push_back(trace.to_vec());
        }
    }

    /// Number of dataset traces not yet matched by the replay.
    pub fn backlog(&self) -> usize {
        self.expected.len()
    }

    /// Replays one campaign line. Dataset traces must be supplied before
    /// the line that emits them.
    pub fn feed(&mut self, line: &CampaignLine) {
        if self.vm_error.is_some() {
            return;
        }
        let expected = &mut self.expected;
        let mismatch = &mut self.mismatch;
        let matched = &mut self.matched;
        let h = self.h;
        let res = self.vm.feed(line, |got| {
            if mismatch.is_some() {
                return;
            }
            let idx = *matched + 1;
            match expected.pop_front() {
                None => {
                    *mismatch = Some(format!("scenario {idx} has no counterpart in the dataset"))
                }
                Some(want) => {
                    if let Some(j) = (0..h).find(|&j| want[j] != got[j]) {
                        *mismatch = Some(format!(
                            "scenario {idx} differs at interval {}: expected {}, got {}",
                            j + 1,
                            want[j],
                            got[j]
                        ));
                        expected.clear();
                    } else {
                        *matched += 1;
                    }
                }
            }
        });
        if let Err(e) = res {
            self.vm_error = Some(e);
        }
        if self.mismatch.is_some() {
            self.expected.clear();
        }
    }

    pub fn finish(mut self) -> Report {
        let replay_ok = self.vm_error.is_none();
        let end = if replay_ok { self.vm.finish() } else { Ok(()) };
        let mut checks = Vec::new();
        checks.push(Check {
            name: "replay",
            passed: replay_ok,
            detail: match &self.vm_error {
                None => format!("{} scenarios replayed", self.vm.emitted()),
                Some(e) => e.to_string(),
            },
        });

        if self.mismatch.is_none() && self.matched != self.dataset_traces {
            self.mismatch = Some(format!(
                "campaign produced {} scenarios, dataset has {}",
                self.vm.emitted(),
                self.dataset_traces
            ));
        }
        checks.push(Check {
            name: "trace-equality",
            passed: self.mismatch.is_none(),
            detail: self
                .mismatch
                .clone()
                .unwrap_or_else(|| format!("{} traces match in order", self.matched)),
        });

        match &self.trie {
            Some(t) => {
                let want = t.prefix_count();
                let got = self.vm.sim_intervals();
                checks.push(Check {
                    name: "prefix-once",
                    passed: want == got,
                    detail: format!("SIM(C)={got}, distinct prefixes={want}"),
                });
            }
            None => checks.push(Check {
                name: "prefix-once",
                passed: true,
                detail: format!("skipped: dataset exceeds {} traces", self.trie_limit),
            }),
        }

        checks.push(Check {
            name: "state-store-empty",
            passed: replay_ok && end.is_ok(),
            detail: match (&self.vm_error, &end) {
                (Some(_), _) => "replay aborted".into(),
                (None, Err(e)) => e.to_string(),
                (None, Ok(())) => format!("peak {} live states", self.vm.max_live_states()),
            },
        });

        Report {
            checks,
            traces: self.dataset_traces,
            sim_intervals: self.vm.sim_intervals(),
            max_live_states: self.vm.max_live_states(),
        }
    }
}

/// Verifies an in-memory campaign against an in-memory dataset.
pub fn verify<'a, T: AsRef<[u64]>>(
    dataset: &[T],
    lines: impl IntoIterator<Item = &'a CampaignLine>,
    h: Horizon,
) -> Report {
    let mut v = Verifier::new(h, DEFAULT_TRIE_LIMIT);
    for t in dataset {
        v.expect(t.as_ref());
    }
    for l in lines {
        v.feed(l);
    }
    v.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::campaign::parse_campaign;

    const GOLDEN: &str = "L0 R1 S1 R1 S2 R3\nL2 I1 R1 S8 R2\nL8 I2 R2\nF2 F8 L1 I1 R3 I1 R1\nF1 L0 I1 R3 S23 R2\nL23 I1 R2\nF23\n";

    fn h(x: usize) -> Horizon {
        Horizon::new(x).unwrap()
    }

    fn golden_sorted() -> Vec<Vec<u64>> {
        vec![
            vec![0, 0, 0, 0, 0],
            vec![0, 0, 1, 0, 0],
            vec![0, 0, 1, 2, 0],
            vec![0, 1, 0, 0, 1],
            vec![1, 0, 0, 0, 0],
            vec![1, 0, 0, 1, 0],
        ]
    }

    #[test]
    fn replays_golden_campaign() {
        let c = parse_campaign(GOLDEN).unwrap();
        let r = replay(&c.lines, h(5)).unwrap();
        let got: Vec<Vec<u64>> = r.scenarios.into_iter().map(|t| t.into_inner()).collect();
        assert_eq!(got, golden_sorted());
        assert_eq!(r.sim_intervals, 21);
        assert_eq!(r.max_live_states, 3);
        let rep = verify(&golden_sorted(), &c.lines, h(5));
        assert!(rep.passed(), "{rep}");
        assert_eq!(
            rep.summary(),
            "PASS checks=4/4 traces=6 sim_c=21 max_live=3"
        );
    }

    #[test]
    fn trivial_line() {
        let c = parse_campaign("L0 R5\n").unwrap();
        let r = replay(&c.lines, h(5)).unwrap();
        assert_eq!(r.scenarios[0].as_slice(), &[0, 0, 0, 0, 0]);
    }

    fn err(text: &str, hh: usize) -> VmError {
        replay(&parse_campaign(text).unwrap().lines, h(hh)).unwrap_err()
    }

    #[test]
    fn diagnostics() {
        assert!(matches!(
            err("L3 R1\n", 2),
            VmError::LoadUnknown { label: 3, .. }
        ));
        assert!(matches!(
            err("L0 R2\nF4\n", 2),
            VmError::FreeUnknown { label: 4, .. }
        ));
        assert!(matches!(
            err("L0 R1 S1 R1\nL0 R1 S1 R1\n", 2),
            VmError::StoreCollision { label: 1, .. }
        ));
        assert!(matches!(
            err("L0 R3\n", 2),
            VmError::RunPastHorizon {
                t: 3,
                position: 0,
                ..
            }
        ));
        assert!(matches!(
            err("L0 R1\n", 2),
            VmError::EndsMidScenario { position: 1 }
        ));
        assert!(matches!(
            err("L0 R1 S1 R1\n", 2),
            VmError::LeakedLabels { count: 1, first: 1 }
        ));
        assert!(matches!(
            err("L0 R2 S1\n", 2),
            VmError::NoActiveState { .. }
        ));
        assert!(matches!(err("F0\n", 2), VmError::FreeInitial { .. }));
    }

    #[test]
    fn double_inject_is_caught() {
        // Not expressible in the text grammar; drive the VM directly.
        let mut vm = Replayer::new(h(3));
        let at = At {
            line: 1,
            command: 2,
        };
        vm.step(SimCommand::Load(0), at, &mut |_| {}).unwrap();
        vm.step(SimCommand::Inject(1), at, &mut |_| {}).unwrap();
        assert!(matches!(
            vm.step(SimCommand::Inject(2), at, &mut |_| {}),
            Err(VmError::DoubleInject { .. })
        ));
    }

    #[test]
    fn perturbed_run_fails_verification() {
        let text = GOLDEN.replacen("L8 I2 R2", "L8 I2 R3", 1);
        let c = parse_campaign(&text).unwrap();
        let rep = verify(&golden_sorted(), &c.lines, h(5));
        assert!(!rep.passed());
        assert!(!rep.checks[0].passed, "{rep}");

        let text = GOLDEN.replacen("L23 I1 R2", "L23 I2 R2", 1);
        let c = parse_campaign(&text).unwrap();
        let rep = verify(&golden_sorted(), &c.lines, h(5));
        assert!(rep.checks[0].passed);
        assert!(!rep.checks[1].passed, "{rep}");
        assert!(
            rep.checks[1]
                .detail
                .contains("scenario 6 differs at interval 4"),
            "{rep}"
        );
    }

    #[test]
    fn trie_counts_prefixes() {
        let mut t = PrefixTrie::new();
        for tr in golden_sorted() {
            t.insert(&tr);
        }
        assert_eq!(t.prefix_count(), 21);
    }
}
