use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stressgraph::graph::GraphConfig;
use stressgraph::models::{evaluate_prepared, prepare, train_prepared, ModelConfig, Network, TrainConfig};
use stressgraph::synth::{generate, SynthSpec};
use stressgraph::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench(c: &mut Criterion) {
    let spec = SynthSpec {
        n_relaxed: 16,
        n_stressed: 16,
        samples: 640,
        ..SynthSpec::default()
    };
    let ds = generate(&spec).unwrap();
    let graph = GraphConfig::default();
    let model = ModelConfig::stgcn();
    let prepared = prepare(&ds, &graph, Execution::Sequential).unwrap();
    let net = Network::init(&model, ds.channels(), 640).unwrap();

    let mut group = c.benchmark_group("prepare");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| prepare(&ds, &graph, exec).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("train_epoch");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = TrainConfig {
            epochs: 1,
            execution: exec,
            ..TrainConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| train_prepared(&model, &prepared, None, cfg).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("evaluate");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| evaluate_prepared(&net, &prepared, 0.5, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
