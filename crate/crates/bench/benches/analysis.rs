use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use impulse_mud::analysis::{
    are_grid, default_quadrature, variance_quadrature, x_variance_closed_form, AreOptions,
};
use impulse_mud::penalty::huber_threshold;
use impulse_mud::{ClosedForm, HuberPenalty, MixtureNoiseModel, XPenalty};

fn bench_variance(c: &mut Criterion) {
    let noise = MixtureNoiseModel::calibrate(0.1, 100.0, 1.0).unwrap();
    let x = XPenalty::new(noise.total_std()).unwrap();
    let huber = HuberPenalty::minimax(&noise).unwrap();
    let spec = default_quadrature();

    c.bench_function("x_variance_closed_form", |b| {
        b.iter(|| {
            black_box(
                x_variance_closed_form(black_box(1.0), &noise, ClosedForm::Corrected).unwrap(),
            )
        })
    });
    c.bench_function("x_variance_quadrature", |b| {
        b.iter(|| black_box(variance_quadrature(&x, &noise, &spec).unwrap()))
    });
    c.bench_function("huber_variance_quadrature", |b| {
        b.iter(|| black_box(variance_quadrature(&huber, &noise, &spec).unwrap()))
    });
    c.bench_function("huber_threshold", |b| {
        b.iter(|| black_box(huber_threshold(black_box(0.05)).unwrap()))
    });
}

fn bench_grid(c: &mut Criterion) {
    let epsilons: Vec<f64> = (0..20)
        .map(|i| 1e-3 * 300f64.powf(i as f64 / 19.0))
        .collect();
    let kappas = [10.0, 50.0, 100.0, 1000.0];
    let options = AreOptions::default();
    let mut group = c.benchmark_group("are_grid");
    group.sample_size(10);
    group.bench_function("20x4", |b| {
        b.iter(|| black_box(are_grid(&epsilons, &kappas, &options).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, bench_variance, bench_grid);
criterion_main!(benches);
