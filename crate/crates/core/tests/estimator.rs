use dtopt::estimator::{
    fit_run, objective, predict_campaign, predict_lines, run_cost, PredictionModel, TGrid,
};
use dtopt::{optimise_dataset, Horizon, Parallelism, SimCommand};
use proptest::prelude::*;

fn grid_points(a: i32, b: i32, alpha: f64, beta: f64, gamma: f64) -> Vec<(f64, f64)> {
    let g = TGrid::from_exponents(a, b).unwrap();
    g.values()
        .into_iter()
        .map(|t| (t, run_cost(alpha, beta, gamma, t)))
        .collect()
}

fn model() -> PredictionModel {
    PredictionModel {
        const_inject: 0.002,
        const_store: 0.05,
        const_load: 0.04,
        const_free: 0.001,
        ..PredictionModel::run_only(0.39, 0.375, 0.4)
    }
}

proptest! {
    #[test]
    fn grid_size_law(a in -8i32..8, span in 1i32..=8) {
        let b = (a + span).min(9);
        prop_assume!(a < b);
        let g = TGrid::from_exponents(a, b).unwrap();
        prop_assert_eq!(g.len(), 9 * (b - a) as usize + 1);
        let v = g.values();
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(v[0], format!("1e{a}").parse::<f64>().unwrap());
        prop_assert_eq!(*v.last().unwrap(), format!("1e{b}").parse::<f64>().unwrap());
    }

    #[test]
    fn planted_breakpoint_is_recovered(
        alpha in 0.01f64..5.0,
        beta in 0.01f64..5.0,
        pick in 2usize..34,
    ) {
        let t = TGrid::from_exponents(-1, 3).unwrap().values();
        let gamma = t[pick];
        let pts = grid_points(-1, 3, alpha, beta, gamma);
        let f = fit_run(&pts, Parallelism::Sequential).unwrap();
        prop_assert!((f.alpha / alpha - 1.0).abs() < 1e-6, "{f:?}");
        prop_assert!((f.beta / beta - 1.0).abs() < 1e-6, "{f:?}");
        prop_assert!(f.err < 1e-6);
        // any model that fits exactly puts γ between the planted point's neighbours
        prop_assert!(f.gamma > t[pick - 1] && f.gamma < t[pick + 1], "{f:?}");
    }

    #[test]
    fn fit_never_loses_to_its_own_candidates(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> = TGrid::from_exponents(0, 2).unwrap().values().into_iter()
            .map(|t| (t, run_cost(0.3, 0.2, 5.0, t) * rng.random_range(0.9..1.1)))
            .collect();
        let seq = fit_run(&pts, Parallelism::Sequential).unwrap();
        let par = fit_run(&pts, Parallelism::Parallel).unwrap();
        prop_assert_eq!(seq, par);
        prop_assert!((objective(&pts, seq.alpha, seq.beta, seq.gamma) - seq.err).abs() < 1e-12);
        prop_assert!(seq.err <= objective(&pts, 0.3, 0.2, 5.0) + 1e-9);
    }

    #[test]
    fn prediction_is_additive(
        data in prop::collection::vec(prop::collection::vec(0u64..3, 5), 1..40),
        tau in 0.001f64..10.0,
    ) {
        let h = Horizon::new(5).unwrap();
        let mut d = data.clone();
        d.sort();
        d.dedup();
        let (c, _) = optimise_dataset(&d, h).unwrap();
        let m = model();
        let text = c.render();
        let streamed = predict_campaign(&m, text.as_bytes(), tau).unwrap();
        let mid = c.lines.len() / 2;
        let split = predict_lines(&m, &c.lines[..mid], tau) + predict_lines(&m, &c.lines[mid..], tau);
        let by_hand: f64 = c.commands().map(|cmd| match cmd {
            SimCommand::Run(k) => {
                let t = k as f64 * tau;
                if t <= 0.4 { 0.39 } else { 0.375 * (t - 0.4) + 0.39 }
            }
            SimCommand::Inject(_) => 0.002,
            SimCommand::Store(_) => 0.05,
            SimCommand::Load(_) => 0.04,
            SimCommand::Free(_) => 0.001,
        }).sum();
        prop_assert!((streamed - by_hand).abs() <= 1e-9 * by_hand);
        prop_assert!((split - by_hand).abs() <= 1e-9 * by_hand);
    }
}

#[test]
fn empty_campaign_predicts_zero() {
    assert_eq!(predict_campaign(&model(), &b""[..], 1.0).unwrap(), 0.0);
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.toml");
    let mut m = model();
    m.t_min = Some(0.1);
    m.seed = Some(42);
    m.save(&p).unwrap();
    assert_eq!(PredictionModel::load(&p).unwrap(), m);
    std::fs::write(&p, "alpha = 1.0\nbogus = 2\n").unwrap();
    assert!(PredictionModel::load(&p).is_err());
}
