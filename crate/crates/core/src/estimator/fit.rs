//! Fitting the piecewise-linear run cost and the command constants.
//!
//! For a fixed breakpoint `γ` the objective is a sum of two norms of affine
//! functions of `(α, β)`, hence convex. Minimising over `β ≥ 0` for each `α`
//! is a weighted least-squares problem with a closed form, so the profile
//! in `α` is convex too and a golden-section search finds its minimum. A
//! compass search then polishes `(α, β)` jointly.

use crate::adapter::{CommandKind, TimedSample};
use crate::error::{Error, Result};
use crate::par::{map_ordered, Parallelism};

use super::model::PredictionModel;

/// Two errors closer than this count as a tie; the smaller `γ` wins.
pub const TIE_TOLERANCE: f64 = 1e-12;

const GOLDEN_ITERATIONS: usize = 200;

/// `run_S(t)`.
pub fn run_cost(alpha: f64, beta: f64, gamma: f64, t: f64) -> f64 {
    if t <= gamma {
        alpha
    } else {
        beta * (t - gamma) + alpha
    }
}

fn rmse_rel(points: impl Iterator<Item = (f64, f64)>, model: impl Fn(f64) -> f64) -> f64 {
    let mut n = 0usize;
    let mut s = 0.0;
    for (t, tau) in points {
        let r = (tau - model(t)) / tau;
        s += r * r;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// Percentage-RMSE objective summed over the `t < γ` and `t ≥ γ` sets,
/// as a fraction.
pub fn objective(points: &[(f64, f64)], alpha: f64, beta: f64, gamma: f64) -> f64 {
    let f = |t| run_cost(alpha, beta, gamma, t);
    rmse_rel(points.iter().copied().filter(|p| p.0 < gamma), f)
        + rmse_rel(points.iter().copied().filter(|p| p.0 >= gamma), f)
}

/// Result of fitting `run_S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunFit {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub err: f64,
}

fn distinct_sorted(ts: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = ts.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Breakpoint candidates: observed `t` values and geometric midpoints of
/// neighbours, keeping those with two distinct `t` values on each side.
pub fn gamma_candidates(points: &[(f64, f64)]) -> Vec<f64> {
    let ts = distinct_sorted(points.iter().map(|p| p.0));
    let mut c = Vec::with_capacity(2 * ts.len());
    for (i, &t) in ts.iter().enumerate() {
        c.push(t);
        if let Some(&u) = ts.get(i + 1) {
            c.push((t * u).sqrt());
        }
    }
    c.retain(|&g| {
        let left = ts.iter().filter(|&&t| t < g).count();
        let right = ts.len() - left;
        left >= 2 && right >= 2
    });
    c.dedup();
    c
}

/// Best `β ≥ 0` for a fixed `α` on the right segment.
fn beta_for(right: &[(f64, f64)], alpha: f64, gamma: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for &(t, tau) in right {
        let w = 1.0 / (tau * tau);
        let x = t - gamma;
        num += w * x * (tau - alpha);
        den += w * x * x;
    }
    if den > 0.0 {
        (num / den).max(0.0)
    } else {
        0.0
    }
}

/// Minimises the objective for a fixed `γ`.
pub fn fit_at(points: &[(f64, f64)], gamma: f64) -> RunFit {
    let right: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 >= gamma).collect();
    let (inv, inv2) = points
        .iter()
        .filter(|p| p.0 < gamma)
        .fold((0.0, 0.0), |(a, b), p| {
            (a + 1.0 / p.1, b + 1.0 / (p.1 * p.1))
        });
    let alpha0 = if inv2 > 0.0 { inv / inv2 } else { 0.0 };
    let eval = |a: f64, b: f64| objective(points, a, b, gamma);
    let profile = |a: f64| eval(a, beta_for(&right, a, gamma));

    let mut best_a = alpha0;
    let mut best_b = beta_for(&right, alpha0, gamma);
    let mut best = eval(best_a, best_b);

    let tau_max = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, 2.0 * tau_max);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = profile(x1);
    let mut f2 = profile(x2);
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = profile(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = profile(x2);
        }
        if hi - lo <= 1e-15 * tau_max {
            break;
        }
    }
    let ga = if f1 <= f2 { x1 } else { x2 };
    let gb = beta_for(&right, ga, gamma);
    let gerr = eval(ga, gb);
    if gerr < best {
        (best_a, best_b, best) = (ga, gb, gerr);
    }

    // compass polish; only improvements are accepted
    let mut step_a = 0.01 * best_a.abs().max(1e-9);
    let mut step_b = 0.01 * best_b.abs().max(1e-9);
    while step_a > 1e-14 * best_a.abs().max(1e-9) {
        let mut moved = false;
        for (da, db) in [(step_a, 0.0), (-step_a, 0.0), (0.0, step_b), (0.0, -step_b)] {
            let (a, b) = (best_a + da, (best_b + db).max(0.0));
            if a <= 0.0 {
                continue;
            }
            let e = eval(a, b);
            if e < best {
                (best_a, best_b, best) = (a, b, e);
                moved = true;
            }
        }
        if !moved {
            step_a /= 2.0;
            step_b /= 2.0;
        }
    }

    RunFit {
        alpha: best_a,
        beta: best_b,
        gamma,
        err: best,
    }
}

/// Fits `run_S` over all breakpoint candidates.
pub fn fit_run(points: &[(f64, f64)], par: Parallelism) -> Result<RunFit> {
    if let Some(p) = points
        .iter()
        .find(|p| !(p.0 > 0.0 && p.1 > 0.0 && p.0.is_finite() && p.1.is_finite()))
    {
        return Err(Error::Fit(format!(
            "sample ({}, {}) is not positive",
            p.0, p.1
        )));
    }
    let candidates = gamma_candidates(points);
    if candidates.is_empty() {
        let n = distinct_sorted(points.iter().map(|p| p.0)).len();
        let thin = if n < 2 { "left" } else { "right" };
        return Err(Error::Fit(format!(
            "{n} distinct t values: the {thin} segment needs at least 2 for every breakpoint"
        )));
    }
    let fits = map_ordered(&candidates, par, |&g| fit_at(points, g));
    let mut best = fits[0];
    for f in &fits[1..] {
        if f.err < best.err - TIE_TOLERANCE {
            best = *f;
        }
    }
    Ok(best)
}

/// Run samples as `(t, τ)` points.
pub fn run_points(samples: &[TimedSample]) -> Vec<(f64, f64)> {
    samples
        .iter()
        .filter(|s| s.kind == CommandKind::Run)
        .filter_map(|s| s.t.map(|t| (t, s.elapsed)))
        .collect()
}

/// Mean elapsed time of the samples of one kind.
pub fn mean_of(samples: &[TimedSample], kind: CommandKind) -> Result<f64> {
    let v: Vec<f64> = samples
        .iter()
        .filter(|s| s.kind == kind)
        .map(|s| s.elapsed)
        .collect();
    if v.is_empty() {
        return Err(Error::Fit(format!("no {kind} samples")));
    }
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// Fits the complete prediction model.
pub fn fit_with(samples: &[TimedSample], par: Parallelism) -> Result<PredictionModel> {
    let run = fit_run(&run_points(samples), par)?;
    let model = PredictionModel {
        alpha: run.alpha,
        beta: run.beta,
        gamma: run.gamma,
        const_inject: mean_of(samples, CommandKind::Inject)?,
        const_store: mean_of(samples, CommandKind::Store)?,
        const_load: mean_of(samples, CommandKind::Load)?,
        const_free: mean_of(samples, CommandKind::Free)?,
        err: run.err,
        t_min: None,
        t_max: None,
        epsilon: None,
        seed: None,
    };
    model.check().map_err(|e| Error::Fit(e.to_string()))?;
    Ok(model)
}

pub fn fit(samples: &[TimedSample]) -> Result<PredictionModel> {
    fit_with(samples, Parallelism::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted(ts: &[f64], a: f64, b: f64, g: f64) -> Vec<(f64, f64)> {
        ts.iter().map(|&t| (t, run_cost(a, b, g, t))).collect()
    }

    fn grid() -> Vec<f64> {
        super::super::grid::build_t(0.1, 100.0).unwrap()
    }

    #[test]
    fn recovers_planted_parameters() {
        let pts = planted(&grid(), 0.39, 0.375, 0.4);
        let f = fit_run(&pts, Parallelism::Sequential).unwrap();
        assert!((f.alpha / 0.39 - 1.0).abs() < 1e-6, "{f:?}");
        assert!((f.beta / 0.375 - 1.0).abs() < 1e-6, "{f:?}");
        assert_eq!(f.gamma, 0.4);
        assert!(f.err < 1e-9);
    }

    #[test]
    fn flat_data() {
        let pts = planted(&grid(), 0.2, 0.0, 1.0);
        let f = fit_run(&pts, Parallelism::Sequential).unwrap();
        assert!((f.alpha - 0.2).abs() < 1e-9);
        assert!(f.beta.abs() < 1e-9);
        assert_eq!(f.gamma, gamma_candidates(&pts)[0]);
    }

    #[test]
    fn candidates_need_two_per_side() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&t| (t, 1.0)).collect();
        let c = gamma_candidates(&pts);
        assert_eq!(c, vec![8f64.sqrt(), 4.0]);
        let few: Vec<(f64, f64)> = [1.0, 2.0, 4.0].iter().map(|&t| (t, 1.0)).collect();
        assert!(matches!(
            fit_run(&few, Parallelism::Sequential),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn never_worse_than_seed() {
        let pts: Vec<(f64, f64)> = grid()
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                (
                    t,
                    run_cost(0.5, 0.1, 2.0, t) * (1.0 + 0.03 * ((i * 7 % 5) as f64 - 2.0)),
                )
            })
            .collect();
        for g in gamma_candidates(&pts) {
            let f = fit_at(&pts, g);
            let right: Vec<_> = pts.iter().copied().filter(|p| p.0 >= g).collect();
            let (inv, inv2) = pts
                .iter()
                .filter(|p| p.0 < g)
                .fold((0.0, 0.0), |(a, b), p| {
                    (a + 1.0 / p.1, b + 1.0 / (p.1 * p.1))
                });
            let a0 = inv / inv2;
            assert!(f.err <= objective(&pts, a0, beta_for(&right, a0, g), g) + 1e-15);
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let pts: Vec<(f64, f64)> = grid()
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                (
                    t,
                    run_cost(0.3, 0.05, 5.0, t) * (1.0 + 0.02 * ((i % 3) as f64 - 1.0)),
                )
            })
            .collect();
        assert_eq!(
            fit_run(&pts, Parallelism::Sequential).unwrap(),
            fit_run(&pts, Parallelism::Parallel).unwrap()
        );
    }
}
