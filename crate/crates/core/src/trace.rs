//! Domain types shared by every stage of the toolchain.
//!
//! A disturbance is a plain `u64` code where `0` means "inject nothing".
//! A disturbance trace is a fixed-length sequence of codes, one per
//! simulation interval, and the horizon is that length. Traces order
//! lexicographically with element-wise unsigned comparison, which is
//! exactly the derived `Ord` of `[u64]`.

use std::fmt;

use crate::error::{Error, Result};

/// A disturbance code. `0` is the non-disturbance.
pub type Disturbance = u64;

pub const NO_DISTURBANCE: Disturbance = 0;

/// Upper bound on the horizon accepted by any tool.
pub const MAX_HORIZON: usize = 1 << 20;

/// Number of simulation intervals per trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Horizon(usize);

impl Horizon {
    pub fn new(h: usize) -> Result<Self> {
        if (1..=MAX_HORIZON).contains(&h) {
            Ok(Horizon(h))
        } else {
            Err(Error::Horizon(h))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Size in bytes of one encoded trace.
    #[inline]
    pub fn record_bytes(self) -> usize {
        self.0 * 8
    }

    /// Rejects datasets whose label space `N·H` would not fit in a `u64`.
    pub fn check_label_space(self, traces: u64) -> Result<()> {
        traces
            .checked_mul(self.0 as u64)
            .map(|_| ())
            .ok_or(Error::LabelOverflow {
                trace: traces,
                horizon: self.0,
            })
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One scenario: a sequence of exactly `H` disturbances.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DisturbanceTrace(Vec<Disturbance>);

impl DisturbanceTrace {
    pub fn new(disturbances: Vec<Disturbance>) -> Result<Self> {
        Horizon::new(disturbances.len())?;
        Ok(DisturbanceTrace(disturbances))
    }

    pub fn horizon(&self) -> Horizon {
        Horizon(self.0.len())
    }

    pub fn as_slice(&self) -> &[Disturbance] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Disturbance> {
        self.0
    }
}

impl AsRef<[Disturbance]> for DisturbanceTrace {
    fn as_ref(&self) -> &[Disturbance] {
        &self.0
    }
}

impl From<DisturbanceTrace> for Vec<Disturbance> {
    fn from(t: DisturbanceTrace) -> Self {
        t.0
    }
}

impl fmt::Display for DisturbanceTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Length of the longest common prefix of two equal-length records.
#[inline]
pub fn common_prefix_len(a: &[Disturbance], b: &[Disturbance]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Name of a simulator state.
///
/// `0` is the initial state. Any other value is `(i - 1)·H + j` for the state
/// reached after interval `j` (1-based) of trace `i` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Label(pub u64);

impl Label {
    pub const INITIAL: Label = Label(0);

    /// Label of interval `j` of trace `i`, both 1-based.
    pub fn encode(trace: u64, interval: usize, h: Horizon) -> Result<Label> {
        debug_assert!(trace >= 1 && (1..=h.get()).contains(&interval));
        (trace - 1)
            .checked_mul(h.get() as u64)
            .and_then(|base| base.checked_add(interval as u64))
            .map(Label)
            .ok_or(Error::LabelOverflow {
                trace,
                horizon: h.get(),
            })
    }

    /// Interval index `j` in `1..=H`. A residue of zero is read as `H`.
    /// Undefined for the initial label.
    pub fn height(self, h: Horizon) -> usize {
        let r = (self.0 % h.get() as u64) as usize;
        if r == 0 {
            h.get()
        } else {
            r
        }
    }

    /// Owning trace index `⌈ℓ / H⌉`; zero for the initial label.
    pub fn owner(self, h: Horizon) -> u64 {
        self.0.div_ceil(h.get() as u64)
    }

    /// `(trace, interval)` pair, or `None` for the initial label.
    pub fn decode(self, h: Horizon) -> Option<(u64, usize)> {
        (self.0 != 0).then(|| (self.owner(h), self.height(h)))
    }

    /// Load height used by the campaign generator: `ℓ mod H`.
    pub fn load_height(self, h: Horizon) -> usize {
        (self.0 % h.get() as u64) as usize
    }

    pub fn is_initial(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
