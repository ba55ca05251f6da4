//! Load and store labels for a lex-ordered unique dataset.
//!
//! Every interval of every trace gets a label naming the simulator state
//! reached after it. A trace inherits its predecessor's labels along their
//! common prefix and mints `(i - 1)·H + j` for the rest. The load label of
//! trace `i` is the label at the end of that common prefix, or `0` when
//! there is none. Store labels are the distinct non-zero load labels in
//! ascending order.

use std::path::Path;

use crate::dtfile::{RecordReader, RecordWriter};
use crate::error::{Error, IoContext, Result};
use crate::extsort::{sort_file, SortBudget};
use crate::trace::{common_prefix_len, Horizon, Label};

/// Length of the longest common prefix of two distinct traces.
///
/// Fails if the traces are equal, since the result must be below `H`.
pub fn lcp_len(prev: &[u64], cur: &[u64]) -> Result<usize> {
    debug_assert_eq!(prev.len(), cur.len());
    let p = common_prefix_len(prev, cur);
    if p == cur.len() {
        return Err(Error::Invalid(
            "duplicate trace: dataset is not unique".into(),
        ));
    }
    Ok(p)
}

/// Incremental load labeller. Keeps only the previous trace and its row of
/// labels.
#[derive(Debug, Clone)]
pub struct LoadLabeller {
    h: Horizon,
    check_order: bool,
    prev: Vec<u64>,
    row: Vec<u64>,
    index: u64,
}

impl LoadLabeller {
    pub fn new(h: Horizon) -> Self {
        LoadLabeller {
            h,
            check_order: true,
            prev: vec![0; h.get()],
            row: vec![0; h.get()],
            index: 0,
        }
    }

    /// Disables the lexicographic-order check. Duplicates are still rejected.
    pub fn trusted(mut self) -> Self {
        self.check_order = false;
        self
    }

    /// Number of traces labelled so far.
    pub fn count(&self) -> u64 {
        self.index
    }

    /// Labels the next trace and returns its load label.
    pub fn push(&mut self, trace: &[u64]) -> Result<Label> {
        let h = self.h.get();
        if trace.len() != h {
            return Err(Error::Invalid(format!(
                "trace of length {} in a dataset of horizon {h}",
                trace.len()
            )));
        }
        let i = self.index + 1;
        let p = if self.index == 0 {
            0
        } else {
            let p = common_prefix_len(&self.prev, trace);
            if p == h {
                return Err(Error::integrity(i, "duplicate of the previous trace"));
            }
            if self.check_order && trace[p] < self.prev[p] {
                return Err(Error::integrity(
                    i,
                    format!("not lexicographically after trace {}", i - 1),
                ));
            }
            p
        };
        let base = (i - 1)
            .checked_mul(h as u64)
            .filter(|b| b.checked_add(h as u64).is_some())
            .ok_or(Error::LabelOverflow {
                trace: i,
                horizon: h,
            })?;
        for j in p..h {
            self.row[j] = base + j as u64 + 1;
        }
        let load = if p == 0 { 0 } else { self.row[p - 1] };
        self.prev.copy_from_slice(trace);
        self.index = i;
        Ok(Label(load))
    }
}

/// Computes the load-label file for a sorted unique DT file. Returns the
/// number of labels written.
pub fn compute_load_labels(
    sorted: impl AsRef<Path>,
    output: impl AsRef<Path>,
    h: Horizon,
    buffer_bytes: usize,
    check_order: bool,
) -> Result<u64> {
    let mut reader = RecordReader::open(sorted.as_ref(), h, buffer_bytes)?;
    h.check_label_space(reader.len())?;
    let mut writer = RecordWriter::create(output.as_ref(), Horizon::new(1)?, buffer_bytes)?;
    let mut labeller = LoadLabeller::new(h);
    if !check_order {
        labeller = labeller.trusted();
    }
    while let Some(rec) = reader.next_record()? {
        let l = labeller.push(rec)?;
        writer.push_word(l.0)?;
    }
    writer.finish()?;
    Ok(labeller.count())
}

/// In-memory load labels for a slice of traces.
pub fn load_labels<T: AsRef<[u64]>>(traces: &[T], h: Horizon) -> Result<Vec<Label>> {
    let mut labeller = LoadLabeller::new(h);
    traces.iter().map(|t| labeller.push(t.as_ref())).collect()
}

/// In-memory store labels from load labels.
pub fn store_labels(load: &[Label]) -> Vec<Label> {
    let mut s: Vec<Label> = load.iter().copied().filter(|l| !l.is_initial()).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Sort-unique of the load-label file with the initial label removed.
/// Returns the number of store labels written.
pub fn compute_store_labels(
    load_labels: impl AsRef<Path>,
    output: impl AsRef<Path>,
    budget: &SortBudget,
) -> Result<u64> {
    let output = output.as_ref();
    let one = Horizon::new(1)?;
    let parent = output
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let tmp = tempfile::Builder::new()
        .prefix(".sl-")
        .tempfile_in(parent)
        .at(parent)?;
    sort_file(load_labels, tmp.path(), one, budget, true)?;

    let mut reader = RecordReader::open(tmp.path(), one, budget.buffer_bytes())?;
    let mut writer = RecordWriter::create(output, one, budget.buffer_bytes())?;
    let mut n = 0;
    while let Some(w) = reader.next_word()? {
        if w != 0 {
            writer.push_word(w)?;
            n += 1;
        }
    }
    writer.finish()?;
    Ok(n)
}
