//! The sampling grid `T_M`: ten equidistant values per decade.

use crate::error::{Error, Result};

use super::probe::decade_exponent;

/// Sampling grid between `10^a` and `10^b`.
///
/// Values are stored as integer multiples of `10^a`, which keeps them exact
/// and lets the training campaign use them directly as run lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TGrid {
    a: i32,
    b: i32,
    units: Vec<u64>,
}

/// `k · 10^e` as the nearest double.
pub fn scaled(k: u64, e: i32) -> f64 {
    format!("{k}e{e}").parse().expect("decimal literal")
}

impl TGrid {
    /// Grid for `[10^a, 10^b]`.
    pub fn from_exponents(a: i32, b: i32) -> Result<Self> {
        if a >= b {
            return Err(Error::Invalid(format!(
                "need t_min < t_max, got 1e{a} and 1e{b}"
            )));
        }
        if b - a > 18 {
            return Err(Error::Invalid(format!(
                "range 1e{a}..1e{b} spans more than 18 decades"
            )));
        }
        let mut units = Vec::with_capacity(9 * (b - a) as usize + 1);
        for i in 0..(b - a) as u32 {
            let base = 10u64.pow(i);
            for j in 1..=10 {
                units.push(base * j);
            }
        }
        units.sort_unstable();
        units.dedup();
        Ok(TGrid { a, b, units })
    }

    /// Grid for `[t_min, t_max]`; both must be exact powers of ten.
    pub fn new(t_min: f64, t_max: f64) -> Result<Self> {
        Self::from_exponents(decade_exponent(t_min)?, decade_exponent(t_max)?)
    }

    pub fn exponents(&self) -> (i32, i32) {
        (self.a, self.b)
    }

    /// Multiples of `10^a`, ascending.
    pub fn units(&self) -> &[u64] {
        &self.units
    }

    pub fn unit_exponent(&self) -> i32 {
        self.a
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// `t` value of `k` units.
    pub fn t_of(&self, k: u64) -> f64 {
        scaled(k, self.a)
    }

    pub fn values(&self) -> Vec<f64> {
        self.units.iter().map(|&k| self.t_of(k)).collect()
    }
}

/// `T_M` for `[t_min, t_max]`.
pub fn build_t(t_min: f64, t_max: f64) -> Result<Vec<f64>> {
    Ok(TGrid::new(t_min, t_max)?.values())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_decade() {
        let v = build_t(1.0, 10.0).unwrap();
        assert_eq!(v, (1..=10).map(|x| x as f64).collect::<Vec<_>>());
    }

    #[test]
    fn values_are_exact_decimals() {
        let v = build_t(0.01, 1000.0).unwrap();
        assert_eq!(v.len(), 46);
        assert_eq!(v[0], 0.01);
        assert_eq!(v[2], 0.03);
        assert_eq!(v[10], 0.2);
        assert_eq!(*v.last().unwrap(), 1000.0);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(build_t(0.02, 10.0).is_err());
        assert!(build_t(10.0, 10.0).is_err());
        assert!(build_t(100.0, 10.0).is_err());
    }
}
