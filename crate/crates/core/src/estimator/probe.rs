//! Choosing the sampling range from integration-step counts.

use crate::adapter::SimAdapter;
use crate::error::{Error, Result};

/// Smallest decade exponent tried when looking for the plateau.
pub const T_MIN_FLOOR: i32 = -12;
/// Iteration cap when looking for the linear regime.
pub const T_MAX_ITERATIONS: i32 = 15;
pub const DEFAULT_EPSILON: f64 = 1e-2;

/// `10^e`, correctly rounded.
pub fn decade(e: i32) -> f64 {
    format!("1e{e}").parse().expect("decimal literal")
}

/// Exponent of an exact power of ten.
pub fn decade_exponent(t: f64) -> Result<i32> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Invalid(format!("{t} is not a power of ten")));
    }
    let e = t.log10().round() as i32;
    if decade(e) != t {
        return Err(Error::Invalid(format!("{t} is not a power of ten")));
    }
    Ok(e)
}

/// Exponent `a` with `t_min = 10^a`: walks down the decades from `10^0`
/// until two consecutive step counts agree and returns the larger one.
pub fn find_t_min(adapter: &mut impl SimAdapter) -> Result<i32> {
    let mut prev = adapter.step_count(decade(0))?;
    for i in (T_MIN_FLOOR..0).rev() {
        let n = adapter.step_count(decade(i))?;
        if n == prev {
            return Ok(i + 1);
        }
        prev = n;
    }
    Err(Error::Probe(format!(
        "no constant regime found down to 1e{T_MIN_FLOOR}"
    )))
}

/// Ordinary least squares `y = a + b·x`.
pub fn ols(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

/// Exponent `b` with `t_max = 10^b`: samples `t_min·10^(i-1)` and stops at
/// the first `i ≥ 3` whose step count lies within `epsilon` (relative) of
/// the regression line through all earlier samples.
pub fn find_t_max(adapter: &mut impl SimAdapter, t_min_exp: i32, epsilon: f64) -> Result<i32> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Invalid(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let mut seen: Vec<(f64, f64)> = Vec::new();
    for i in 1..=T_MAX_ITERATIONS {
        let e = t_min_exp + i - 1;
        let t = decade(e);
        let n = adapter.step_count(t)? as f64;
        if i >= 3 {
            let (a, b) = ols(&seen);
            let predicted = a + b * t;
            if predicted != 0.0 && (n / predicted - 1.0).abs() < epsilon {
                return Ok(e);
            }
        }
        seen.push((t, n));
    }
    Err(Error::Probe(format!(
        "no linear regime found within {T_MAX_ITERATIONS} iterations"
    )))
}
