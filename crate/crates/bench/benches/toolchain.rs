use std::hint::black_box;

use cook_core::runtime::{MOCK_DECLARATIONS, MOCK_EXPORTS};
use cook_core::toolchain::{generate_library, HookConfig, Interface, TemplateSet};
use cook_core::Strategy;
use criterion::{criterion_group, criterion_main, Criterion};

fn generation(c: &mut Criterion) {
    let templates = TemplateSet::shipped();
    for strategy in [Strategy::Callback, Strategy::Synced, Strategy::Worker] {
        let config = HookConfig::parse(strategy.hook_config().unwrap()).unwrap();
        c.bench_function(&format!("generate_library/{strategy}"), |b| {
            b.iter(|| {
                generate_library(
                    black_box(MOCK_DECLARATIONS),
                    MOCK_EXPORTS,
                    &config,
                    &templates,
                )
                .unwrap()
            })
        });
    }
}

fn parsing(c: &mut Criterion) {
    c.bench_function("interface_parse", |b| {
        b.iter(|| Interface::parse(black_box(MOCK_DECLARATIONS)).unwrap())
    });
    let text = Strategy::Worker.hook_config().unwrap();
    c.bench_function("hook_config_parse", |b| {
        b.iter(|| HookConfig::parse(black_box(text)).unwrap())
    });
}

criterion_group!(benches, generation, parsing);
criterion_main!(benches);
