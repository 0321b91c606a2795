use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use restrictlab_bench::{parabola, recovery_instance};
use restrictlab_core::restriction::ExtensionRank;
use restrictlab_core::{dft, energy_exact, logan_recover, random_instance, Amplitudes, LoganParams};
use std::hint::black_box;

fn bench_dft(c: &mut Criterion) {
    let mut group = c.benchmark_group("dft");
    for n in [15u64, 35, 105] {
        let f = random_instance(parabola(n).ring(), (n * n) as usize, 0, 7, Amplitudes::Gaussian);
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| dft(black_box(f))));
    }
    group.finish();
}

fn bench_energy(c: &mut Criterion) {
    let mut group = c.benchmark_group("energy");
    for n in [35u64, 105, 210] {
        let sigma = parabola(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &sigma, |b, s| {
            b.iter(|| energy_exact(black_box(s), None).unwrap())
        });
    }
    group.finish();
}

fn bench_logan(c: &mut Criterion) {
    let mut group = c.benchmark_group("logan_recover");
    group.sample_size(10);
    for (n, e) in [(15u64, 7usize), (35, 17)] {
        let problem = recovery_instance(n, e, 0);
        let params = LoganParams::default();
        group.bench_function(BenchmarkId::new(format!("N={n}"), e), |b| {
            b.iter(|| logan_recover(black_box(&problem), &params))
        });
    }
    group.finish();
}

fn bench_rank(c: &mut Criterion) {
    let sigma = parabola(6);
    let tester = ExtensionRank::new(&sigma);
    let support = [0usize, 7, 14, 21, 28, 35];
    c.bench_function("rank_test/N=6/size=6", |b| {
        b.iter(|| tester.admits_signal(black_box(&support)))
    });
}

criterion_group!(benches, bench_dft, bench_energy, bench_logan, bench_rank);
criterion_main!(benches);
