use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use mgc_core::applications::{state_frame_potential, vacuum_state, Ensemble, FpMode};
use mgc_core::clifford::PatternSpace;
use mgc_core::gt::GtBasis;
use mgc_core::{cm_twirl, matchgate_twirl, to_dense, Bridges, CasimirSpec};

fn string_algebra(c: &mut Criterion) {
    let b = Bridges::new(2, 4).unwrap();
    c.bench_function("quadratic casimir n=2 k=4", |bench| {
        bench.iter(|| b.casimir(black_box(&CasimirSpec::quadratic(4))).unwrap())
    });
    let cas = b.casimir(&CasimirSpec::quadratic(4)).unwrap();
    c.bench_function("casimir squared n=2 k=4", |bench| {
        bench.iter(|| black_box(&cas).multiply(&cas).unwrap())
    });
}

fn commutant_bases(c: &mut Criterion) {
    let mut g = c.benchmark_group("bases");
    g.sample_size(10);
    g.bench_function("pattern space n=2 k=4", |bench| {
        bench.iter(|| PatternSpace::new(black_box(2), 4).unwrap())
    });
    g.bench_function("gt basis n=2 k=4", |bench| {
        bench.iter(|| GtBasis::build(black_box(2), 4).unwrap())
    });
    g.finish();
}

fn twirls(c: &mut Criterion) {
    let mut g = c.benchmark_group("twirls");
    g.sample_size(10);
    let vac = vacuum_state(2, 3).unwrap();
    g.bench_function("matchgate twirl of vacuum n=2 k=3", |bench| {
        bench.iter(|| matchgate_twirl(black_box(&vac)).unwrap())
    });
    g.bench_function("clifford-matchgate twirl of vacuum n=2 k=3", |bench| {
        bench.iter(|| cm_twirl(black_box(&vac)).unwrap())
    });
    g.bench_function("dense expansion n=2 k=3", |bench| {
        bench.iter(|| to_dense(black_box(&vac)).unwrap())
    });
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte carlo");
    g.sample_size(10);
    g.bench_function("state frame potential n=2 k=4, 1000 samples", |bench| {
        bench.iter(|| {
            state_frame_potential(2, 4, Ensemble::Matchgate, FpMode::Mc, 1000, black_box(1))
                .unwrap()
        })
    });
    g.finish();
}

criterion_group!(
    benches,
    string_algebra,
    commutant_bases,
    twirls,
    monte_carlo
);
criterion_main!(benches);
