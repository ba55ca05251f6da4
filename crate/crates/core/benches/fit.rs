use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dtopt::adapter::{SimAdapter, SimOp, SyntheticAdapter, SyntheticConfig};
use dtopt::estimator::{fit_run, TGrid};
use dtopt::Parallelism;

fn samples(a: i32, b: i32, reps: usize) -> Vec<(f64, f64)> {
    let mut adapter = SyntheticAdapter::new(SyntheticConfig {
        noise: 0.05,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let grid = TGrid::from_exponents(a, b).unwrap().values();
    let mut pts = Vec::with_capacity(grid.len() * reps);
    for _ in 0..reps {
        for &t in &grid {
            pts.push((t, adapter.measure(&SimOp::Run(t)).unwrap().elapsed));
        }
    }
    pts
}

fn bench_fit(c: &mut Criterion) {
    let mut g = c.benchmark_group("fit_run");
    for (a, b) in [(-1, 3), (-5, 4)] {
        let pts = samples(a, b, 5);
        for (name, par) in [
            ("sequential", Parallelism::Sequential),
            ("parallel", Parallelism::Parallel),
        ] {
            g.bench_with_input(BenchmarkId::new(name, pts.len()), &pts, |bench, pts| {
                bench.iter(|| fit_run(black_box(pts), par).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, bench_fit);
criterion_main!(benches);
