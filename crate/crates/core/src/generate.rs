//! Seeded random datasets for tests and benchmarks.
//!
//! Each trace either starts fresh or copies a prefix of one of the last few
//! traces and continues from there, which gives datasets the shared
//! prefixes real disturbance sets have. Output is unsorted and may contain
//! duplicates, like a raw dataset.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::dtfile::RecordWriter;
use crate::error::{Error, Result};
use crate::trace::Horizon;

const RING: usize = 16;

/// Distribution of disturbance codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Skew {
    #[default]
    Uniform,
    Zipf,
}

impl FromStr for Skew {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Skew::Uniform),
            "zipf" => Ok(Skew::Zipf),
            _ => Err(Error::Invalid(format!(
                "unknown skew {s:?}; expected uniform or zipf"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n: u64,
    pub h: Horizon,
    /// Number of distinct non-zero disturbance codes.
    pub kinds: u64,
    /// Probability that an interval carries a disturbance.
    pub density: f64,
    /// Probability that a trace extends a prefix of a recent one.
    pub share: f64,
    pub skew: Skew,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(n: u64, h: Horizon, kinds: u64, seed: u64) -> Self {
        GenConfig {
            n,
            h,
            kinds,
            density: 0.3,
            share: 0.5,
            skew: Skew::Uniform,
            seed,
        }
    }

    fn check(&self) -> Result<()> {
        if self.kinds == 0 {
            return Err(Error::Invalid("kinds must be at least 1".into()));
        }
        for (name, p) in [("density", self.density), ("share", self.share)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Invalid(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Trace generator; an iterator over freshly generated traces.
pub struct Generator {
    cfg: GenConfig,
    rng: ChaCha8Rng,
    zipf: Option<Zipf<f64>>,
    ring: Vec<Vec<u64>>,
    next_slot: usize,
    emitted: u64,
}

impl Generator {
    pub fn new(cfg: GenConfig) -> Result<Self> {
        cfg.check()?;
        let zipf = match cfg.skew {
            Skew::Uniform => None,
            Skew::Zipf => {
                Some(Zipf::new(cfg.kinds as f64, 1.1).map_err(|e| Error::Invalid(e.to_string()))?)
            }
        };
        Ok(Generator {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            zipf,
            ring: Vec::with_capacity(RING),
            next_slot: 0,
            emitted: 0,
        })
    }

    fn code(&mut self) -> u64 {
        if !self.rng.random_bool(self.cfg.density) {
            return 0;
        }
        match &self.zipf {
            Some(z) => z.sample(&mut self.rng) as u64,
            None => self.rng.random_range(1..=self.cfg.kinds),
        }
    }

    /// Writes the next trace into `out`, which must have length `H`.
    pub fn fill(&mut self, out: &mut [u64]) {
        let h = self.cfg.h.get();
        let mut start = 0;
        if !self.ring.is_empty() && self.rng.random_bool(self.cfg.share) {
            let src = self.rng.random_range(0..self.ring.len());
            start = self.rng.random_range(0..h);
            out[..start].copy_from_slice(&self.ring[src][..start]);
        }
        for slot in &mut out[start..] {
            *slot = self.code();
        }
        if self.ring.len() < RING {
            self.ring.push(out.to_vec());
        } else {
            self.ring[self.next_slot].copy_from_slice(out);
            self.next_slot = (self.next_slot + 1) % RING;
        }
        self.emitted += 1;
    }
}

impl Iterator for Generator {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.emitted >= self.cfg.n {
            return None;
        }
        let mut v = vec![0; self.cfg.h.get()];
        self.fill(&mut v);
        Some(v)
    }
}

/// Generates the dataset in memory.
pub fn generate(cfg: &GenConfig) -> Result<Vec<Vec<u64>>> {
    Ok(Generator::new(cfg.clone())?.collect())
}

/// Streams the dataset to a DT file. Returns bytes written.
pub fn generate_file(cfg: &GenConfig, path: impl AsRef<Path>, buffer_bytes: usize) -> Result<u64> {
    let mut g = Generator::new(cfg.clone())?;
    let mut w = RecordWriter::create(path, cfg.h, buffer_bytes)?;
    let mut rec = vec![0; cfg.h.get()];
    for _ in 0..cfg.n {
        g.fill(&mut rec);
        w.push(&rec)?;
    }
    w.finish()
}

/// Streams the dataset to any writer as little-endian words.
pub fn generate_to(cfg: &GenConfig, mut out: impl Write) -> Result<()> {
    let mut g = Generator::new(cfg.clone())?;
    let mut rec = vec![0; cfg.h.get()];
    let io = |e| Error::Invalid(format!("write failed: {e}"));
    for _ in 0..cfg.n {
        g.fill(&mut rec);
        for w in &rec {
            out.write_all(&w.to_le_bytes()).map_err(io)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> GenConfig {
        GenConfig::new(500, Horizon::new(12).unwrap(), 4, seed)
    }

    #[test]
    fn same_seed_same_data() {
        assert_eq!(generate(&cfg(7)).unwrap(), generate(&cfg(7)).unwrap());
        assert_ne!(generate(&cfg(7)).unwrap(), generate(&cfg(8)).unwrap());
    }

    #[test]
    fn codes_in_range() {
        for skew in [Skew::Uniform, Skew::Zipf] {
            let c = GenConfig { skew, ..cfg(1) };
            let d = generate(&c).unwrap();
            assert_eq!(d.len(), 500);
            assert!(d.iter().flatten().all(|&x| x <= 4));
            assert!(d.iter().flatten().any(|&x| x == 4));
        }
    }

    #[test]
    fn file_matches_memory() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.DT");
        let c = cfg(3);
        generate_file(&c, &p, 64).unwrap();
        let words = crate::dtfile::read_all_records(&p, c.h).unwrap();
        assert_eq!(words, generate(&c).unwrap().concat());
        let mut buf = Vec::new();
        generate_to(&c, &mut buf).unwrap();
        assert_eq!(buf, std::fs::read(&p).unwrap());
    }

    #[test]
    fn bad_config() {
        assert!(Generator::new(GenConfig { kinds: 0, ..cfg(1) }).is_err());
        assert!(Generator::new(GenConfig {
            density: 1.5,
            ..cfg(1)
        })
        .is_err());
        assert!("pareto".parse::<Skew>().is_err());
    }
}
