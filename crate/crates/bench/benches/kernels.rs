use std::hint::black_box;

use alphaconc_bench::{goe, weibull_sample};
use alphaconc_core::distributions::DistributionSpec;
use alphaconc_core::montecarlo::{empirical_tail, t_grid, Centering, GridScale, HarnessOptions, StatisticKind, StatisticSpec};
use alphaconc_core::orlicz::{orlicz_norm_empirical, AlphaParam};
use alphaconc_core::specnorms::{al12_norm_decoupled, max_budgeted_sum, operator_norm};
use alphaconc_core::Sidedness;
use criterion::{criterion_group, criterion_main, Criterion};

fn orlicz(c: &mut Criterion) {
    let xs = weibull_sample(1.0, 100_000);
    let alpha = AlphaParam::new(1.0).unwrap();
    c.bench_function("orlicz_empirical_1e5", |b| {
        b.iter(|| orlicz_norm_empirical(black_box(&xs), alpha, 1e-9).unwrap())
    });
}

fn norms(c: &mut Criterion) {
    let a = goe(200);
    c.bench_function("operator_norm_200", |b| b.iter(|| operator_norm(black_box(a.matrix())).unwrap()));

    let weights: Vec<f64> = (1..=64).map(|i| 1.0 / i as f64).collect();
    let alpha = AlphaParam::new(1.5).unwrap();
    c.bench_function("max_budgeted_sum_64", |b| {
        b.iter(|| max_budgeted_sum(black_box(&weights), 8.0, alpha))
    });

    let small = goe(8);
    c.bench_function("decoupled_chaos_norm_8", |b| {
        b.iter(|| al12_norm_decoupled(black_box(small.matrix()), 4.0, alpha).unwrap())
    });
}

fn harness(c: &mut Criterion) {
    let n = 50;
    let spec = StatisticSpec::new(
        StatisticKind::QuadraticForm {
            matrix: goe(n),
            variances: vec![1.0; n],
        },
        DistributionSpec::StandardGaussian,
        Centering::Analytic,
        Sidedness::TwoSided,
    )
    .unwrap();
    let grid = t_grid(0.5, 50.0, 30, GridScale::Log).unwrap();
    let mut group = c.benchmark_group("empirical_tail");
    group.sample_size(10);
    group.bench_function("quadratic_form_50_x_2e4", |b| {
        b.iter(|| empirical_tail(&spec, &grid, 20_000, 1, HarnessOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, orlicz, norms, harness);
criterion_main!(benches);
