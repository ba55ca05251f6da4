//! Optimised campaign generation from a sorted dataset, its load labels and
//! its store labels.
//!
//! One pass over the three streams emits one line per trace. Each line
//! frees states that no later trace can reach, loads the state at the end
//! of the trace's shared prefix, then simulates the remaining intervals,
//! cutting a run wherever a disturbance is injected or a state must be
//! stored for a later trace. Generation keeps `O(H)` state: the free slots
//! indexed by height, the previous trace, and a one-label lookahead on the
//! store stream.

use std::fmt;
use std::io::{BufWriter, Write};
use std::iter::Peekable;
use std::path::Path;

use crate::campaign::{Campaign, CampaignLine, SimCommand};
use crate::dtfile::RecordReader;
use crate::error::{Error, Result};
use crate::labelling::{load_labels, store_labels};
use crate::trace::{common_prefix_len, Horizon, Label};

/// Counters describing a generated campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CampaignStats {
    pub traces: u64,
    pub horizon: usize,
    /// Sum of `Run` arguments.
    pub sim_c: u64,
    pub loads: u64,
    pub stores: u64,
    pub frees: u64,
    pub injects: u64,
}

impl CampaignStats {
    pub fn compression(&self) -> Compression {
        Compression {
            sim_d: self.traces * self.horizon as u64,
            sim_c: self.sim_c,
        }
    }
}

/// Raw versus optimised simulation effort, in intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Compression {
    /// `N·H`.
    pub sim_d: u64,
    /// Sum of `Run` arguments in the campaign.
    pub sim_c: u64,
}

impl Compression {
    /// `SIM_D / SIM_C`, or `None` for an empty campaign.
    pub fn ratio(&self) -> Option<f64> {
        (self.sim_c > 0).then(|| self.sim_d as f64 / self.sim_c as f64)
    }
}

impl fmt::Display for Compression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SIM_D={} SIM_C={} ratio=", self.sim_d, self.sim_c)?;
        match self.ratio() {
            Some(r) => write!(f, "{r:.2}"),
            None => f.write_str("n/a"),
        }
    }
}

/// Compression figures for a dataset of `traces` traces of horizon `h`
/// against any campaign.
pub fn campaign_stats<'a>(
    traces: u64,
    h: Horizon,
    lines: impl IntoIterator<Item = &'a CampaignLine>,
) -> Compression {
    Compression {
        sim_d: traces * h.get() as u64,
        sim_c: lines.into_iter().map(CampaignLine::run_total).sum(),
    }
}

/// Streaming line generator.
pub struct CampaignGenerator<S: Iterator<Item = Result<u64>>> {
    h: Horizon,
    free: Vec<u64>,
    stored: Vec<u64>,
    loaded: Vec<bool>,
    prev: Vec<u64>,
    index: u64,
    pending: Peekable<S>,
    stats: CampaignStats,
}

impl<S: Iterator<Item = Result<u64>>> CampaignGenerator<S> {
    /// `store_labels` must be ascending. A leading `0` (as left by a plain
    /// sort-unique of the load labels) is skipped.
    pub fn new(h: Horizon, store_labels: S) -> Self {
        CampaignGenerator {
            h,
            free: vec![0; h.get()],
            stored: vec![0; h.get()],
            loaded: vec![false; h.get()],
            prev: vec![0; h.get()],
            index: 0,
            pending: store_labels.peekable(),
            stats: CampaignStats {
                horizon: h.get(),
                ..Default::default()
            },
        }
    }

    pub fn stats(&self) -> &CampaignStats {
        &self.stats
    }

    fn head(&mut self) -> Result<Option<u64>> {
        loop {
            match self.pending.peek() {
                None => return Ok(None),
                Some(Ok(0)) if self.stats.stores == 0 => {
                    self.pending.next();
                }
                Some(Ok(v)) => return Ok(Some(*v)),
                Some(Err(_)) => return Err(self.pending.next().unwrap().unwrap_err()),
            }
        }
    }

    /// True if `label` is the next pending store label; consumes it.
    fn take_store(&mut self, label: u64, trace: u64) -> Result<bool> {
        match self.head()? {
            Some(s) if s < label => Err(Error::integrity(
                trace,
                format!("store label {s} out of order: expected a label at or after {label}"),
            )),
            Some(s) if s == label => {
                self.pending.next();
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    /// Emits the line for the next trace.
    pub fn line(&mut self, trace: &[u64], load: Label) -> Result<CampaignLine> {
        let h = self.h.get();
        let i = self.index + 1;
        if trace.len() != h {
            return Err(Error::integrity(
                i,
                format!("trace length {} != horizon {h}", trace.len()),
            ));
        }
        let p = load.load_height(self.h);
        if !load.is_initial() && p == 0 {
            return Err(Error::integrity(
                i,
                format!("load label {load} names a completed trace"),
            ));
        }
        if i == 1 && !load.is_initial() {
            return Err(Error::integrity(
                i,
                format!("first trace must load 0, got {load}"),
            ));
        }
        if i > 1 {
            let lcp = common_prefix_len(&self.prev, trace);
            if lcp == h {
                return Err(Error::integrity(i, "duplicate trace"));
            }
            if trace[lcp] < self.prev[lcp] {
                return Err(Error::integrity(
                    i,
                    "dataset is not lexicographically ordered",
                ));
            }
            if lcp != p {
                return Err(Error::integrity(
                    i,
                    format!("load label {load} implies prefix {p} but the common prefix is {lcp}"),
                ));
            }
        }
        if !load.is_initial() && self.stored[p] != load.0 {
            return Err(Error::integrity(
                i,
                format!("load of label {load} that was never stored"),
            ));
        }
        let base = (i - 1).checked_mul(h as u64).ok_or(Error::LabelOverflow {
            trace: i,
            horizon: h,
        })?;

        let mut cmds = Vec::with_capacity(2 * (h - p) + 2);
        for j in p + 1..h {
            if self.stored[j] != 0 {
                if !self.loaded[j] {
                    return Err(Error::integrity(
                        i,
                        format!(
                            "stored label {} is unreachable and was never loaded",
                            self.stored[j]
                        ),
                    ));
                }
                self.stored[j] = 0;
            }
            if self.free[j] > 0 {
                cmds.push(SimCommand::Free(self.free[j]));
                self.free[j] = 0;
                self.stats.frees += 1;
            }
        }
        if self.free[p] != 0 && self.free[p] != load.0 {
            return Err(Error::integrity(
                i,
                format!("free slot {p} holds {} while loading {load}", self.free[p]),
            ));
        }
        cmds.push(SimCommand::Load(load.0));
        self.free[p] = load.0;
        self.loaded[p] = true;
        self.stats.loads += 1;

        // Intervals are 1-based: interval b holds trace[b - 1] and ends in
        // label base + b.
        let mut start = p + 1;
        for b in p + 2..=h {
            let label = base + (b - 1) as u64;
            let store = self.take_store(label, i)?;
            if store || trace[b - 1] != 0 {
                self.emit_segment(&mut cmds, trace, start, b);
                if store {
                    cmds.push(SimCommand::Store(label));
                    self.stored[b - 1] = label;
                    self.loaded[b - 1] = false;
                    self.stats.stores += 1;
                }
                start = b;
            }
        }
        self.emit_segment(&mut cmds, trace, start, h + 1);

        self.prev.copy_from_slice(trace);
        self.index = i;
        self.stats.traces = i;
        Ok(CampaignLine::from_checked(cmds))
    }

    fn emit_segment(
        &mut self,
        cmds: &mut Vec<SimCommand>,
        trace: &[u64],
        start: usize,
        end: usize,
    ) {
        let d = trace[start - 1];
        if d != 0 {
            cmds.push(SimCommand::Inject(d));
            self.stats.injects += 1;
        }
        let t = (end - start) as u64;
        cmds.push(SimCommand::Run(t));
        self.stats.sim_c += t;
    }

    /// Checks that every store label was used and returns the trailing
    /// cleanup line, if any state is still live.
    pub fn finish(mut self) -> Result<(Option<CampaignLine>, CampaignStats)> {
        if let Some(s) = self.head()? {
            return Err(Error::integrity(
                self.index,
                format!("store label {s} was never reached"),
            ));
        }
        if let Some(j) = (1..self.h.get()).find(|&j| self.stored[j] != 0 && !self.loaded[j]) {
            return Err(Error::integrity(
                self.index,
                format!("stored label {} was never loaded", self.stored[j]),
            ));
        }
        let frees: Vec<SimCommand> = self
            .free
            .iter()
            .filter(|&&f| f > 0)
            .map(|&f| SimCommand::Free(f))
            .collect();
        self.stats.frees += frees.len() as u64;
        let line = (!frees.is_empty()).then(|| CampaignLine::from_checked(frees));
        Ok((line, self.stats))
    }
}

struct Words(RecordReader);

impl Iterator for Words {
    type Item = Result<u64>;

    fn next(&mut self) -> Option<Result<u64>> {
        self.0.next_word().transpose()
    }
}

/// Generates the optimised campaign from the three files and writes its
/// text to `sink` through a write buffer of `buffer_bytes`.
pub fn generate_campaign(
    sorted: impl AsRef<Path>,
    load_labels: impl AsRef<Path>,
    store_labels: impl AsRef<Path>,
    h: Horizon,
    buffer_bytes: usize,
    sink: impl Write,
) -> Result<CampaignStats> {
    let one = Horizon::new(1)?;
    let mut dataset = RecordReader::open(sorted.as_ref(), h, buffer_bytes)?;
    let mut loads = RecordReader::open(load_labels.as_ref(), one, buffer_bytes)?;
    let stores = RecordReader::open(store_labels.as_ref(), one, buffer_bytes)?;
    if dataset.len() != loads.len() {
        return Err(Error::Invalid(format!(
            "{} traces but {} load labels",
            dataset.len(),
            loads.len()
        )));
    }
    h.check_label_space(dataset.len())?;

    let mut out = BufWriter::with_capacity(buffer_bytes.max(1), sink);
    let io_err = |e| Error::io("<campaign output>", e);
    let mut gen = CampaignGenerator::new(h, Words(stores));
    let mut text = String::new();
    while let Some(trace) = dataset.next_record()? {
        let load = loads.next_word()?.expect("label count checked");
        let line = gen.line(trace, Label(load))?;
        text.clear();
        line.render_into(&mut text);
        out.write_all(text.as_bytes()).map_err(io_err)?;
    }
    let (cleanup, stats) = gen.finish()?;
    if let Some(line) = cleanup {
        out.write_all(line.render().as_bytes()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    Ok(stats)
}

/// Runs labelling and generation in memory for a sorted unique dataset.
pub fn optimise_dataset<T: AsRef<[u64]>>(
    traces: &[T],
    h: Horizon,
) -> Result<(Campaign, CampaignStats)> {
    let loads = load_labels(traces, h)?;
    let stores = store_labels(&loads);
    let mut gen = CampaignGenerator::new(h, stores.into_iter().map(|l| Ok(l.0)));
    let mut lines = Vec::with_capacity(traces.len() + 1);
    for (t, l) in traces.iter().zip(&loads) {
        lines.push(gen.line(t.as_ref(), *l)?);
    }
    let (cleanup, stats) = gen.finish()?;
    lines.extend(cleanup);
    Ok((Campaign { lines }, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "L0 R1 S1 R1 S2 R3\nL2 I1 R1 S8 R2\nL8 I2 R2\nF2 F8 L1 I1 R3 I1 R1\nF1 L0 I1 R3 S23 R2\nL23 I1 R2\nF23\n";

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
    fn golden_campaign() {
        let (c, stats) = optimise_dataset(&golden_sorted(), Horizon::new(5).unwrap()).unwrap();
        assert_eq!(c.render(), GOLDEN);
        assert_eq!(stats.sim_c, 21);
        assert_eq!(stats.stores, 4);
        assert_eq!(stats.frees, 4);
        let comp = stats.compression();
        assert_eq!((comp.sim_d, comp.sim_c), (30, 21));
        assert_eq!(comp.to_string(), "SIM_D=30 SIM_C=21 ratio=1.43");
    }

    #[test]
    fn single_zero_trace() {
        let (c, _) = optimise_dataset(&[vec![0u64; 5]], Horizon::new(5).unwrap()).unwrap();
        assert_eq!(c.render(), "L0 R5\n");
        assert_eq!(
            campaign_stats(1, Horizon::new(5).unwrap(), &c.lines).ratio(),
            Some(1.0)
        );
    }

    #[test]
    fn repeated_lcp_label_is_not_freed() {
        // Consecutive traces reloading the same state at the same height.
        let traces = vec![vec![0, 0, 0], vec![0, 1, 0], vec![0, 2, 0]];
        let (c, _) = optimise_dataset(&traces, Horizon::new(3).unwrap()).unwrap();
        assert_eq!(c.render(), "L0 R1 S1 R2\nL1 I1 R2\nL1 I2 R2\nF1\n");
    }

    #[test]
    fn leading_zero_store_label_is_skipped() {
        let h = Horizon::new(5).unwrap();
        let traces = golden_sorted();
        let loads = load_labels(&traces, h).unwrap();
        let mut gen = CampaignGenerator::new(h, [0u64, 1, 2, 8, 23].into_iter().map(Ok));
        let mut text = String::new();
        for (t, l) in traces.iter().zip(&loads) {
            gen.line(t, *l).unwrap().render_into(&mut text);
        }
        let (tail, _) = gen.finish().unwrap();
        tail.unwrap().render_into(&mut text);
        assert_eq!(text, GOLDEN);
    }

    #[test]
    fn inconsistent_inputs_are_rejected() {
        let h = Horizon::new(5).unwrap();
        let traces = golden_sorted();
        let good = [0u64, 2, 8, 1, 0, 23];

        let run = |loads: &[u64], stores: &[u64]| -> Result<()> {
            let mut gen = CampaignGenerator::new(h, stores.iter().copied().map(Ok));
            for (t, l) in traces.iter().zip(loads) {
                gen.line(t, Label(*l))?;
            }
            gen.finish().map(|_| ())
        };
        run(&good, &[1, 2, 8, 23]).unwrap();
        // wrong prefix height for trace 3
        assert!(matches!(
            run(&[0, 2, 7, 1, 0, 23], &[1, 2, 8, 23]),
            Err(Error::Integrity { trace: 3, .. })
        ));
        // load label 8 was never stored
        assert!(matches!(
            run(&good, &[1, 2, 23]),
            Err(Error::Integrity { trace: 3, .. })
        ));
        // unused store label
        assert!(run(&good, &[1, 2, 8, 9, 23]).is_err());
        // store label that is never reached
        assert!(run(&good, &[1, 2, 8, 23, 40]).is_err());
    }
}
