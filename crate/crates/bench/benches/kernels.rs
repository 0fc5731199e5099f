use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use sphens::analytics::{cap_count_pmf, count_variance_exact, gap_cdf_finite, hole_probability};
use sphens::estimators::{cap_discrepancy, largest_empty_cap, riesz_energy, DiscrepancyMode};
use sphens::rng::RngSeed;
use sphens::samplers::{sample, SamplerKind};

fn samplers(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample");
    g.sample_size(10);
    for n in [64usize, 256] {
        for kind in [SamplerKind::Matrix, SamplerKind::Dpp, SamplerKind::Iid] {
            g.bench_with_input(BenchmarkId::new(kind.name(), n), &n, |b, &n| {
                let mut seed = 0u64;
                b.iter(|| {
                    seed += 1;
                    sample(kind, n, RngSeed(seed)).unwrap()
                })
            });
        }
    }
    g.finish();
}

fn estimators(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimators");
    g.sample_size(10);
    let small = sample(SamplerKind::Iid, 64, RngSeed(7)).unwrap();
    let large = sample(SamplerKind::Iid, 1024, RngSeed(7)).unwrap();
    g.bench_function("riesz_energy/1024", |b| b.iter(|| riesz_energy(black_box(&large), 1.0).unwrap()));
    g.bench_function("largest_empty_cap/1024", |b| b.iter(|| largest_empty_cap(black_box(&large)).unwrap()));
    g.bench_function("cap_discrepancy_exact/64", |b| {
        b.iter(|| cap_discrepancy(black_box(&small), DiscrepancyMode::CandidateExact).unwrap())
    });
    g.bench_function("cap_discrepancy_grid/1024", |b| {
        b.iter(|| cap_discrepancy(black_box(&large), DiscrepancyMode::Grid).unwrap())
    });
    g.finish();
}

fn analytics(c: &mut Criterion) {
    let mut g = c.benchmark_group("analytics");
    g.bench_function("cap_count_pmf/4096", |b| b.iter(|| cap_count_pmf(black_box(4096), 0.3).unwrap()));
    g.bench_function("count_variance_exact/4096", |b| b.iter(|| count_variance_exact(black_box(4096), 0.3).unwrap()));
    g.bench_function("hole_probability/1024", |b| b.iter(|| hole_probability(black_box(1024), 0.05).unwrap()));
    g.bench_function("gap_cdf_finite/1024", |b| b.iter(|| gap_cdf_finite(black_box(1024), 2.0).unwrap()));
    g.finish();
}

criterion_group!(benches, samplers, estimators, analytics);
criterion_main!(benches);
