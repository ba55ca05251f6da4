//! Streaming reader and writer for DT files.
//!
//! A DT file is a headerless sequence of little-endian `u64` disturbance
//! codes, `H` per trace, with no separators. Label files use the same
//! encoding with `H = 1`.

use std::fs::File;
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, IoContext, Result};
use crate::trace::{DisturbanceTrace, Horizon};

/// Buffer size used where the caller does not supply one.
pub const DEFAULT_BUFFER_BYTES: usize = 1 << 20;

/// Reads `dst.len()` words from `r`, decoding little-endian in place.
pub(crate) fn read_words(r: &mut impl Read, dst: &mut [u64]) -> io::Result<()> {
    r.read_exact(bytemuck::cast_slice_mut(dst))?;
    for w in dst.iter_mut() {
        *w = u64::from_le(*w);
    }
    Ok(())
}

/// Writes `src` little-endian. The buffer is left encoded.
pub(crate) fn write_words(w: &mut impl Write, src: &mut [u64]) -> io::Result<()> {
    for x in src.iter_mut() {
        *x = x.to_le();
    }
    w.write_all(bytemuck::cast_slice(src))
}

/// Number of records in a DT file, validating its size.
pub fn record_count(path: &Path, h: Horizon) -> Result<u64> {
    let len = std::fs::metadata(path).at(path)?.len();
    let record_bytes = h.record_bytes() as u64;
    if len % record_bytes != 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            len,
            record_bytes,
        });
    }
    Ok(len / record_bytes)
}

/// Buffered, record-at-a-time reader over one DT file.
pub struct RecordReader {
    file: File,
    path: PathBuf,
    h: usize,
    buf: Vec<u64>,
    filled: usize,
    cursor: usize,
    remaining: u64,
    total: u64,
    /// Index of the first record of the segment within the file.
    start: u64,
}

impl RecordReader {
    /// Opens `path` with a read buffer of `buffer_bytes` (at least one record).
    pub fn open(path: impl AsRef<Path>, h: Horizon, buffer_bytes: usize) -> Result<Self> {
        let total = record_count(path.as_ref(), h)?;
        Self::open_segment(path, h, buffer_bytes, 0, total)
    }

    /// Opens the `len` records starting at record `start`.
    pub fn open_segment(
        path: impl AsRef<Path>,
        h: Horizon,
        buffer_bytes: usize,
        start: u64,
        len: u64,
    ) -> Result<Self> {
        let path = path.as_ref();
        let mut file = File::open(path).at(path)?;
        if start > 0 {
            file.seek(SeekFrom::Start(start * h.record_bytes() as u64))
                .at(path)?;
        }
        let per_buf = (buffer_bytes / h.record_bytes()).max(1) as u64;
        let cap = per_buf.min(len.max(1)) as usize;
        Ok(RecordReader {
            file,
            path: path.to_path_buf(),
            h: h.get(),
            buf: vec![0; cap * h.get()],
            filled: 0,
            cursor: 0,
            remaining: len,
            total: len,
            start,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn horizon(&self) -> usize {
        self.h
    }

    /// Total records in the file.
    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Index of the next record to be returned, relative to the segment.
    pub fn position(&self) -> u64 {
        self.total - self.remaining - (self.filled - self.cursor) as u64
    }

    /// Byte offset in the file of the next record.
    pub fn byte_offset(&self) -> u64 {
        (self.start + self.position()) * (self.h as u64 * 8)
    }

    fn fill(&mut self) -> Result<()> {
        let cap = self.buf.len() / self.h;
        let n = (self.remaining.min(cap as u64)) as usize;
        read_words(&mut self.file, &mut self.buf[..n * self.h]).at(&self.path)?;
        self.remaining -= n as u64;
        self.filled = n;
        self.cursor = 0;
        Ok(())
    }

    /// The next record without consuming it.
    pub fn peek(&mut self) -> Result<Option<&[u64]>> {
        if self.cursor == self.filled {
            if self.remaining == 0 {
                return Ok(None);
            }
            self.fill()?;
        }
        let s = self.cursor * self.h;
        Ok(Some(&self.buf[s..s + self.h]))
    }

    /// Record made available by the last successful `peek`.
    pub(crate) fn current(&self) -> &[u64] {
        let s = self.cursor * self.h;
        &self.buf[s..s + self.h]
    }

    /// Consumes the record returned by the last `peek`.
    pub fn advance(&mut self) {
        debug_assert!(self.cursor < self.filled);
        self.cursor += 1;
    }

    pub fn next_record(&mut self) -> Result<Option<&[u64]>> {
        if self.cursor == self.filled {
            if self.remaining == 0 {
                return Ok(None);
            }
            self.fill()?;
        }
        let s = self.cursor * self.h;
        self.cursor += 1;
        Ok(Some(&self.buf[s..s + self.h]))
    }

    /// Next single word; only meaningful for `H = 1` files.
    pub fn next_word(&mut self) -> Result<Option<u64>> {
        Ok(self.next_record()?.map(|r| r[0]))
    }
}

/// Iterator adapter yielding owned traces.
pub struct Traces {
    reader: RecordReader,
}

impl Traces {
    pub fn len(&self) -> u64 {
        self.reader.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reader.is_empty()
    }
}

impl Iterator for Traces {
    type Item = Result<DisturbanceTrace>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.reader.next_record() {
            Ok(Some(r)) => Some(DisturbanceTrace::new(r.to_vec())),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    }
}

/// Streams the traces of a DT file in file order.
pub fn read_traces(path: impl AsRef<Path>, h: Horizon, buffer_bytes: usize) -> Result<Traces> {
    Ok(Traces {
        reader: RecordReader::open(path, h, buffer_bytes)?,
    })
}

/// Buffered record writer.
pub struct RecordWriter {
    file: File,
    path: PathBuf,
    h: usize,
    buf: Vec<u64>,
    len: usize,
    written: u64,
}

impl RecordWriter {
    pub fn create(path: impl AsRef<Path>, h: Horizon, buffer_bytes: usize) -> Result<Self> {
        let path = path.as_ref();
        let file = File::create(path).at(path)?;
        let per_buf = (buffer_bytes / h.record_bytes()).max(1);
        Ok(RecordWriter {
            file,
            path: path.to_path_buf(),
            h: h.get(),
            buf: vec![0; per_buf * h.get()],
            len: 0,
            written: 0,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Records pushed so far.
    pub fn records(&self) -> u64 {
        (self.written / 8 + self.len as u64) / self.h as u64
    }

    pub fn push(&mut self, record: &[u64]) -> Result<()> {
        debug_assert_eq!(record.len(), self.h);
        if self.len == self.buf.len() {
            self.flush_buf()?;
        }
        self.buf[self.len..self.len + self.h].copy_from_slice(record);
        self.len += self.h;
        Ok(())
    }

    pub fn push_word(&mut self, w: u64) -> Result<()> {
        self.push(std::slice::from_ref(&w))
    }

    fn flush_buf(&mut self) -> Result<()> {
        write_words(&mut self.file, &mut self.buf[..self.len]).at(&self.path)?;
        self.written += (self.len * 8) as u64;
        self.len = 0;
        Ok(())
    }

    /// Flushes and returns the total bytes written.
    pub fn finish(mut self) -> Result<u64> {
        self.flush_buf()?;
        self.file.flush().at(&self.path)?;
        Ok(self.written)
    }
}

/// Writes traces to `path`; all must share one horizon. Returns bytes written.
pub fn write_traces<I, T>(traces: I, path: impl AsRef<Path>) -> Result<u64>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u64]>,
{
    let path = path.as_ref();
    let mut iter = traces.into_iter().peekable();
    let Some(first) = iter.peek() else {
        File::create(path).at(path)?;
        return Ok(0);
    };
    let h = Horizon::new(first.as_ref().len())?;
    let mut w = RecordWriter::create(path, h, DEFAULT_BUFFER_BYTES)?;
    for t in iter {
        let t = t.as_ref();
        if t.len() != h.get() {
            return Err(Error::Invalid(format!(
                "trace of length {} in a dataset of horizon {h}",
                t.len()
            )));
        }
        w.push(t)?;
    }
    w.finish()
}

/// Reads a whole file into one flat buffer. Intended for small files.
pub fn read_all_records(path: impl AsRef<Path>, h: Horizon) -> Result<Vec<u64>> {
    let path = path.as_ref();
    let n = record_count(path, h)? as usize;
    let mut out = vec![0; n * h.get()];
    let mut f = File::open(path).at(path)?;
    read_words(&mut f, &mut out).at(path)?;
    Ok(out)
}

/// Writes a flat buffer of words to `path`.
pub fn write_all_words(path: impl AsRef<Path>, words: &[u64]) -> Result<u64> {
    let path = path.as_ref();
    let mut f = File::create(path).at(path)?;
    let mut tmp = words.to_vec();
    write_words(&mut f, &mut tmp).at(path)?;
    Ok(words.len() as u64 * 8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn golden_input() -> Vec<Vec<u64>> {
        vec![
            vec![0, 0, 0, 0, 0],
            vec![1, 0, 0, 1, 0],
            vec![0, 0, 1, 2, 0],
            vec![0, 0, 1, 0, 0],
            vec![0, 1, 0, 0, 1],
            vec![1, 0, 0, 0, 0],
            vec![1, 0, 0, 0, 0],
        ]
    }

    #[test]
    fn example_file_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("golden.DT");
        let n = write_traces(golden_input(), &p).unwrap();
        assert_eq!(n, 280);
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 280);

        let bytes = std::fs::read(&p).unwrap();
        // second trace starts at byte 40 with code 1, little-endian
        assert_eq!(&bytes[40..48], &[1, 0, 0, 0, 0, 0, 0, 0]);

        let h = Horizon::new(5).unwrap();
        let traces: Vec<_> = read_traces(&p, h, 64)
            .unwrap()
            .map(|t| t.unwrap())
            .collect();
        assert_eq!(traces.len(), 7);
        assert_eq!(traces[0].as_slice(), &[0, 0, 0, 0, 0]);
        assert_eq!(traces[1].as_slice(), &[1, 0, 0, 1, 0]);
    }

    #[test]
    fn empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.DT");
        assert_eq!(write_traces(Vec::<Vec<u64>>::new(), &p).unwrap(), 0);
        for h in [1, 5, 32] {
            let mut it = read_traces(&p, Horizon::new(h).unwrap(), 1024).unwrap();
            assert!(it.next().is_none());
        }
    }

    #[test]
    fn rejects_partial_record() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.DT");
        std::fs::write(&p, vec![0u8; 8 * 5 + 3]).unwrap();
        let err = read_traces(&p, Horizon::new(5).unwrap(), 1024)
            .err()
            .unwrap();
        match err {
            Error::Format {
                len, record_bytes, ..
            } => {
                assert_eq!(len, 43);
                assert_eq!(record_bytes, 40);
            }
            e => panic!("unexpected {e}"),
        }
        assert!(err_string(&p).contains("43"));
    }

    fn err_string(p: &Path) -> String {
        read_traces(p, Horizon::new(5).unwrap(), 1024)
            .err()
            .unwrap()
            .to_string()
    }

    #[test]
    fn mixed_horizon_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("mixed.DT");
        assert!(write_traces(vec![vec![1, 2], vec![3]], &p).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn byte_roundtrip(h in 1usize..9, k in 0usize..60, seed in any::<u64>(), buf in 8usize..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let bytes: Vec<u8> = (0..8 * h * k).map(|_| rng.random()).collect();
            let dir = tempfile::tempdir().unwrap();
            let src = dir.path().join("src.DT");
            let dst = dir.path().join("dst.DT");
            std::fs::write(&src, &bytes).unwrap();
            let hz = Horizon::new(h).unwrap();
            let traces: Vec<_> = read_traces(&src, hz, buf).unwrap().map(|t| t.unwrap()).collect();
            prop_assert_eq!(traces.len(), k);
            let n = write_traces(&traces, &dst).unwrap();
            prop_assert_eq!(n as usize, bytes.len());
            prop_assert_eq!(std::fs::read(&dst).unwrap(), bytes);
        }
    }
}
