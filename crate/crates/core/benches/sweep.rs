use cellcov::analytic::{coverage_curve, AnalyticEvaluator, LinkMode, NetworkParams, ThresholdGrid};
use cellcov::montecarlo::{run_sweep, SweepConfig};
use cellcov::parallel::Execution;
use cellcov::spatial::SimWindow;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn strategies() -> [(&'static str, Execution); 2] {
    [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::default()),
    ]
}

fn sweep_config(mode: LinkMode, lambda: f64) -> SweepConfig {
    SweepConfig::new(
        mode,
        NetworkParams::new(lambda, 4.0, 0.0, 1.0).unwrap(),
        vec![0.0, 0.5, 1.0],
        SimWindow::new(2000.0).unwrap(),
        ThresholdGrid::default(),
        300,
        42,
    )
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_sweep");
    group.sample_size(10);
    for (mode, lambda) in [(LinkMode::Dl, 1e-4), (LinkMode::Ul, 2.5e-5)] {
        let config = sweep_config(mode, lambda);
        for (name, execution) in strategies() {
            group.bench_with_input(BenchmarkId::new(name, mode), &config, |b, cfg| {
                b.iter(|| run_sweep(cfg, execution).unwrap())
            });
        }
    }
    group.finish();
}

fn analytic(c: &mut Criterion) {
    let mut group = c.benchmark_group("coverage_curve");
    group.sample_size(10);
    let evaluator = AnalyticEvaluator::default();
    let grid = ThresholdGrid::default();
    for (label, mode, kappa) in [("dl_general", LinkMode::Dl, 2.5), ("ul_eps0", LinkMode::Ul, 3.0)] {
        for (name, execution) in strategies() {
            group.bench_function(BenchmarkId::new(name, label), |b| {
                b.iter(|| coverage_curve(mode, &grid, kappa, 0.0, &evaluator, execution).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, analytic);
criterion_main!(benches);
