use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use dvoretzky::capacity::{energy, KernelPhi, SupportMeasure};
use dvoretzky::coversim::{expected_uncovered_exact, run_trial, UncoveredSet, DEFAULT_MAX_PANELS, DEFAULT_RTOL};
use dvoretzky::density::{step, tent};
use dvoretzky::{ArcSet, LengthSequence};
use dvoretzky_bench::step_trial;

fn sampling(c: &mut Criterion) {
    let f = step(0.5, 1.5, 0.5).unwrap();
    let us: Vec<f64> = (0..1024).map(|i| (i as f64 + 0.5) / 1024.0).collect();
    c.bench_function("inverse_cdf/1024", |b| {
        b.iter(|| us.iter().map(|&u| f.inverse_cdf(black_box(u)).unwrap()).sum::<f64>())
    });
}

fn uncovered(c: &mut Criterion) {
    c.bench_function("uncovered_set/1e4_removals", |b| {
        b.iter_batched(
            UncoveredSet::full,
            |mut s| {
                for n in 1..=10_000u64 {
                    let x = (n as f64 * 0.618_033_988_749_895).fract();
                    s.remove_centered(x, 0.5 / n as f64);
                }
                s.measure()
            },
            BatchSize::SmallInput,
        )
    });
}

fn trials(c: &mut Criterion) {
    let cfg = step_trial(0.8, 100_000);
    c.bench_function("run_trial/step_c0.8_1e5", |b| b.iter(|| run_trial(black_box(&cfg)).unwrap()));
}

fn oracles(c: &mut Criterion) {
    let seq = LengthSequence::harmonic(1.0).unwrap();
    let f = tent();
    c.bench_function("exact_uncovered/tent_1e3", |b| {
        b.iter(|| expected_uncovered_exact(&f, &seq, black_box(1_000), &ArcSet::full(), DEFAULT_RTOL, DEFAULT_MAX_PANELS).unwrap())
    });
    let kernel = KernelPhi::new(&seq, 0.5, 100_000).unwrap();
    let sigma = SupportMeasure::parse("lebesgue:0:0.5").unwrap();
    c.bench_function("energy/lebesgue_1e5", |b| b.iter(|| energy(black_box(&kernel), &sigma).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = sampling, uncovered, trials, oracles
}
criterion_main!(benches);
