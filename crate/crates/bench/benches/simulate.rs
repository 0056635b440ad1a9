use criterion::{black_box, criterion_group, criterion_main, Criterion};
use spikenorm::experiments::{example_network, exp_quantization, gen_random_train};
use spikenorm::{lif, snn_forward, ExperimentConfig, Leak, LifConfig, ResetMode};

fn simulate(c: &mut Criterion) {
    let cfg = ExperimentConfig {
        n_spikes: 1000,
        ..ExperimentConfig::quantization()
    };
    let train = gen_random_train(&cfg, 0);
    for reset in ResetMode::ALL {
        let neuron = LifConfig::new(1.0, Leak::Finite(1.0), reset).unwrap();
        c.bench_function(&format!("lif/{reset}/1000"), |b| {
            b.iter(|| lif(black_box(&train), &neuron))
        });
    }

    let net = example_network(LifConfig::quantizer(1.0, Leak::Finite(0.5)).unwrap());
    let inputs = [gen_random_train(&cfg, 1), gen_random_train(&cfg, 2)];
    c.bench_function("snn_forward/2-3-1/1000", |b| {
        b.iter(|| snn_forward(black_box(&inputs), &net).unwrap())
    });

    let small = ExperimentConfig {
        n_trials: 10,
        ..ExperimentConfig::quantization()
    };
    let mut group = c.benchmark_group("experiments");
    group.sample_size(10);
    group.bench_function("quantization/10_trials", |b| {
        b.iter(|| exp_quantization(black_box(&small)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, simulate);
criterion_main!(benches);
