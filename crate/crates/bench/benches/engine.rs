use std::hint::black_box;

use cook_bench::{mmult, short_dna};
use cook_core::metrics::build_report;
use cook_core::{run_configuration, Isol, Strategy};
use criterion::{criterion_group, criterion_main, Criterion};

fn mmult_runs(c: &mut Criterion) {
    let mut g = c.benchmark_group("mmult");
    g.sample_size(10);
    for (isol, strategy) in [
        (Isol::Isolation, Strategy::None),
        (Isol::Parallel, Strategy::None),
        (Isol::Parallel, Strategy::Synced),
        (Isol::Parallel, Strategy::Worker),
    ] {
        let cfg = mmult(isol, strategy);
        g.bench_function(cfg.label(), |b| {
            b.iter(|| run_configuration(black_box(&cfg)).unwrap())
        });
    }
    g.finish();
}

fn dna_runs(c: &mut Criterion) {
    let mut g = c.benchmark_group("dna");
    g.sample_size(10);
    for strategy in Strategy::ALL {
        let cfg = short_dna(Isol::Parallel, strategy, 4);
        g.bench_function(cfg.label(), |b| {
            b.iter(|| run_configuration(black_box(&cfg)).unwrap())
        });
    }
    g.finish();
}

fn report(c: &mut Criterion) {
    let run = run_configuration(&mmult(Isol::Parallel, Strategy::None)).unwrap();
    c.bench_function("build_report/mmult-parallel-none", |b| {
        b.iter(|| build_report(black_box(&run), &[]).unwrap())
    });
}

criterion_group!(benches, mmult_runs, dna_runs, report);
criterion_main!(benches);
