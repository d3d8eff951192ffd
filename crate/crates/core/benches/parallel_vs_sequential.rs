use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qecmetro::metrology::{self, ExperimentConfig, NoiseModel};
use qecmetro::pauli::{pauli, PauliOperator};
use qecmetro::parallel::{map_slice, Execution};
use qecmetro::simulator::logical_action_oracle;
use qecmetro::stabilizer::builtin;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn monte_carlo(c: &mut Criterion) {
    let code = builtin("fivequbit").unwrap();
    let h = metrology::signal_preset(&code, "logicalZ-all").unwrap();
    let base = ExperimentConfig::new(code, h, 1.0, PI / 20.0, 100_000, 1);
    let mut group = c.benchmark_group("monte_carlo_100k");
    for (name, exec) in MODES {
        let mut config = base.clone();
        config.execution = exec;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| metrology::monte_carlo_estimate(&config).unwrap())
        });
    }
    group.finish();
}

fn noisy_trajectories(c: &mut Criterion) {
    let code = builtin("repetition3").unwrap();
    let h = metrology::signal_preset(&code, "logicalZ-all").unwrap();
    let base = ExperimentConfig::new(code, h, 1.0, PI / 12.0, 20_000, 1).with_noise(
        NoiseModel {
            error_ops: vec![pauli("XII"), pauli("IXI"), pauli("IIX")],
            probability: 0.02,
        },
        10,
    );
    let mut group = c.benchmark_group("noisy_20k");
    group.sample_size(20);
    for (name, exec) in MODES {
        let mut config = base.clone();
        config.execution = exec;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| metrology::noisy_run(&config).unwrap())
        });
    }
    group.finish();
}

fn distance_search(c: &mut Criterion) {
    let code = builtin("fivequbit").unwrap();
    let mut group = c.benchmark_group("distance_fivequbit");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| code.distance_with(exec).unwrap())
        });
    }
    group.finish();
}

fn oracle_sweep(c: &mut Criterion) {
    let code = builtin("fivequbit").unwrap();
    let words: Vec<PauliOperator> = PauliOperator::all_words(5).collect();
    let mut group = c.benchmark_group("oracle_sweep_fivequbit");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                map_slice(exec, &words, |p| {
                    code.classify(p).unwrap() == logical_action_oracle(&code, p).unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, noisy_trajectories, distance_search, oracle_sweep);
criterion_main!(benches);
