//! Out-of-core lexicographic sorting of DT files under a fixed buffer budget.
//!
//! Sorting proceeds in two phases. Run formation reads the input one chunk
//! of `⌊B / 8H⌋` records at a time, sorts it in place and appends it as a
//! run to a single run file. Runs are then merged strictly two at a time,
//! pairing them left to right, each pass writing its merged runs to a fresh
//! run file, until one run remains. A merge holds one read buffer per input
//! and one write buffer, each of `B` bytes.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use crate::dtfile::{read_words, record_count, write_words, RecordReader, RecordWriter};
use crate::error::{Error, IoContext, Result};
use crate::records::{dedup_sorted_records, sort_records};
use crate::trace::Horizon;

/// Memory budget for sorting: bytes per buffer plus a directory for runs.
#[derive(Debug, Clone)]
pub struct SortBudget {
    buffer_bytes: usize,
    temp_dir: Option<PathBuf>,
}

impl SortBudget {
    pub fn new(buffer_bytes: usize) -> Self {
        SortBudget {
            buffer_bytes,
            temp_dir: None,
        }
    }

    /// Directory for run files. Defaults to the system temp dir (`TMPDIR`).
    pub fn with_temp_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.temp_dir = Some(dir.into());
        self
    }

    pub fn buffer_bytes(&self) -> usize {
        self.buffer_bytes
    }

    /// Records per buffer; fails if the buffer holds fewer than two.
    pub fn records_per_buffer(&self, h: Horizon) -> Result<usize> {
        let n = self.buffer_bytes / h.record_bytes();
        if n < 2 {
            return Err(Error::Budget {
                bytes: self.buffer_bytes,
                record_bytes: h.record_bytes(),
            });
        }
        Ok(n)
    }

    fn temp_root(&self) -> PathBuf {
        self.temp_dir.clone().unwrap_or_else(std::env::temp_dir)
    }
}

/// Sorted runs stored back to back in one file inside a private
/// temporary directory.
#[derive(Debug)]
pub struct Runs {
    dir: tempfile::TempDir,
    pub file: PathBuf,
    /// Record count of each run, in file order.
    pub lengths: Vec<u64>,
    /// Records read from the input.
    pub records_in: u64,
}

impl Runs {
    pub fn dir(&self) -> &Path {
        self.dir.path()
    }
}

/// Splits `input` into sorted runs of at most one buffer each.
pub fn sort_runs(
    input: impl AsRef<Path>,
    h: Horizon,
    budget: &SortBudget,
    unique: bool,
) -> Result<Runs> {
    let input = input.as_ref();
    let per_chunk = budget.records_per_buffer(h)?;
    let total = record_count(input, h)?;
    let root = budget.temp_root();
    let dir = tempfile::Builder::new()
        .prefix("dtsort-")
        .tempdir_in(&root)
        .at(&root)?;

    let mut file = File::open(input).at(input)?;
    let path = dir.path().join("runs-0.DT");
    let mut out = File::create(&path).at(&path)?;
    let cap = (per_chunk as u64).min(total) as usize;
    let mut chunk = vec![0u64; cap * h.get()];
    let mut lengths = Vec::new();
    let mut remaining = total;
    while remaining > 0 {
        let n = remaining.min(per_chunk as u64) as usize;
        let words = &mut chunk[..n * h.get()];
        read_words(&mut file, words).at(input)?;
        remaining -= n as u64;

        sort_records(words, h.get());
        let kept = if unique {
            dedup_sorted_records(words, h.get())
        } else {
            n
        };
        write_words(&mut out, &mut words[..kept * h.get()]).at(&path)?;
        lengths.push(kept as u64);
    }
    Ok(Runs {
        dir,
        file: path,
        lengths,
        records_in: total,
    })
}

/// Streaming two-way merge of two lex-ordered DT files into `output`.
///
/// Ties prefer `run_a`. With `unique`, equal records are written once,
/// including duplicates within a single input. Returns records written.
pub fn merge_pair(
    run_a: impl AsRef<Path>,
    run_b: impl AsRef<Path>,
    output: impl AsRef<Path>,
    h: Horizon,
    budget: &SortBudget,
    unique: bool,
) -> Result<u64> {
    budget.records_per_buffer(h)?;
    let bytes = budget.buffer_bytes;
    let mut a = MergeInput::new(RecordReader::open(run_a.as_ref(), h, bytes)?);
    let mut b = MergeInput::new(RecordReader::open(run_b.as_ref(), h, bytes)?);
    let mut out = RecordWriter::create(output.as_ref(), h, bytes)?;
    let n = merge_into(&mut a, &mut b, &mut out, h, unique)?;
    out.finish()?;
    Ok(n)
}

/// Merges two inputs, appending to `out`. Returns records appended.
fn merge_into(
    a: &mut MergeInput,
    b: &mut MergeInput,
    out: &mut RecordWriter,
    h: Horizon,
    unique: bool,
) -> Result<u64> {
    let mut last_out = vec![0u64; h.get()];
    let mut have_out = false;
    let mut written = 0u64;
    loop {
        let has_a = a.ensure()?;
        let has_b = b.ensure()?;
        let take_a = match (has_a, has_b) {
            (false, false) => break,
            (true, false) => true,
            (false, true) => false,
            (true, true) => a.current() <= b.current(),
        };
        let src = if take_a { &mut *a } else { &mut *b };
        src.check_order()?;
        let rec = src.current();
        if !(unique && have_out && rec == last_out.as_slice()) {
            out.push(rec)?;
            last_out.copy_from_slice(rec);
            have_out = true;
            written += 1;
        }
        src.advance();
    }
    Ok(written)
}

struct MergeInput {
    reader: RecordReader,
    last: Vec<u64>,
    has_last: bool,
}

impl MergeInput {
    fn new(reader: RecordReader) -> Self {
        MergeInput {
            last: vec![0; reader.horizon()],
            reader,
            has_last: false,
        }
    }

    fn ensure(&mut self) -> Result<bool> {
        Ok(self.reader.peek()?.is_some())
    }

    fn current(&self) -> &[u64] {
        self.reader.current()
    }

    fn check_order(&self) -> Result<()> {
        if self.has_last && self.current() < self.last.as_slice() {
            return Err(Error::Unsorted {
                path: self.reader.path().to_path_buf(),
                offset: self.reader.byte_offset(),
            });
        }
        Ok(())
    }

    fn advance(&mut self) {
        self.last.copy_from_slice(self.reader.current());
        self.has_last = true;
        self.reader.advance();
    }
}

/// Counters reported by [`sort_file`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SortStats {
    pub records_in: u64,
    pub records_out: u64,
    pub runs: usize,
    pub passes: usize,
}

/// Sorts a DT file: run formation followed by repeated pairwise merging.
pub fn sort_file(
    input: impl AsRef<Path>,
    output: impl AsRef<Path>,
    h: Horizon,
    budget: &SortBudget,
    unique: bool,
) -> Result<SortStats> {
    let output = output.as_ref();
    let runs = sort_runs(input, h, budget, unique)?;
    let mut stats = SortStats {
        records_in: runs.records_in,
        runs: runs.lengths.len(),
        ..Default::default()
    };
    let bytes = budget.buffer_bytes;
    let mut file = runs.file.clone();
    let mut lengths = runs.lengths.clone();

    while lengths.len() > 1 {
        stats.passes += 1;
        let last_pass = lengths.len() == 2;
        let dst = if last_pass {
            output.to_path_buf()
        } else {
            runs.dir().join(format!("runs-{}.DT", stats.passes))
        };
        let mut out = RecordWriter::create(&dst, h, bytes)?;
        let mut next = Vec::with_capacity(lengths.len().div_ceil(2));
        let mut start = 0;
        for pair in lengths.chunks(2) {
            let n = match *pair {
                [la, lb] => {
                    let mut a =
                        MergeInput::new(RecordReader::open_segment(&file, h, bytes, start, la)?);
                    let mut b = MergeInput::new(RecordReader::open_segment(
                        &file,
                        h,
                        bytes,
                        start + la,
                        lb,
                    )?);
                    merge_into(&mut a, &mut b, &mut out, h, unique)?
                }
                [la] => {
                    let mut a = RecordReader::open_segment(&file, h, bytes, start, la)?;
                    while let Some(rec) = a.next_record()? {
                        out.push(rec)?;
                    }
                    la
                }
                _ => unreachable!(),
            };
            start += pair.iter().sum::<u64>();
            next.push(n);
        }
        out.finish()?;
        fs::remove_file(&file).at(&file)?;
        if last_pass {
            stats.records_out = next[0];
            return Ok(stats);
        }
        file = dst;
        lengths = next;
    }

    if fs::rename(&file, output).is_err() {
        fs::copy(&file, output).at(output)?;
    }
    stats.records_out = lengths.first().copied().unwrap_or(0);
    Ok(stats)
}
