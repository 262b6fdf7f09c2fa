use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use arb_core::bench::{run_method, BenchConfig, GnnModel, Method};
use arb_core::exchange::{generate_dataset, generate_dataset_with};
use arb_core::gnn::{init_params, train_with, GnnConfig};
use arb_core::par::Execution;
use arb_core::GeneratorConfig;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn dataset_generation(c: &mut Criterion) {
    let cfg = GeneratorConfig {
        count: 10_000,
        ..Default::default()
    };
    let mut group = c.benchmark_group("generate_10k");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| generate_dataset_with(black_box(&cfg), exec).unwrap())
        });
    }
    group.finish();
}

fn method_sweeps(c: &mut Criterion) {
    let nets = generate_dataset(&GeneratorConfig {
        count: 1000,
        seed: 1,
        ..Default::default()
    })
    .unwrap()
    .networks;
    let gnn_cfg = GnnConfig::default();
    let model = GnnModel {
        params: init_params(&gnn_cfg, 4, 0).unwrap(),
        config: gnn_cfg,
    };
    let mut group = c.benchmark_group("sweep_1000");
    group.sample_size(10);
    for method in Method::ALL {
        for (name, exec) in MODES {
            let cfg = BenchConfig {
                repetitions: 1,
                execution: exec,
                model: Some(model.clone()),
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(method.id(), name), &nets, |b, nets| {
                b.iter(|| run_method(method, nets, &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn training_epoch(c: &mut Criterion) {
    let nets = generate_dataset(&GeneratorConfig {
        count: 800,
        seed: 2,
        ..Default::default()
    })
    .unwrap()
    .networks;
    let cfg = GnnConfig {
        epochs: 1,
        ..Default::default()
    };
    let mut group = c.benchmark_group("train_epoch_800");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| train_with(&nets, &cfg, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, dataset_generation, method_sweeps, training_epoch);
criterion_main!(benches);
