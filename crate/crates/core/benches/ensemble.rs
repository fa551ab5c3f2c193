//! Parallel vs sequential ensemble execution of the event-driven dynamics.
//!
//! Run with `cargo bench -p abc-ring`. The two benches produce identical
//! outputs (same per-trajectory seed streams); the comparison isolates the
//! rayon fan-out against the strictly sequential fallback.

use criterion::{criterion_group, criterion_main, Criterion};

use abc_ring::engine::Engine;
use abc_ring::ensemble::{map_seeds, map_seeds_sequential};
use abc_ring::measures::sample_product_measure;
use abc_ring::params::ModelParams;
use abc_ring::rng::ChaCha8Rng;

fn run_one(params: &ModelParams, mut rng: ChaCha8Rng, t_max: f64) -> [usize; 3] {
    let init = sample_product_measure(1.0 / 3.0, 1.0 / 3.0, params.n(), &mut rng)
        .expect("valid densities");
    let mut engine = Engine::new(*params, init, rng).expect("matching sizes");
    engine.run_to(t_max, &[], &mut []);
    engine.config().counts()
}

fn bench_ensemble(c: &mut Criterion) {
    let params = ModelParams::new(256, 0.5, [1.0, 1.0, 0.0], 0).unwrap();
    let t_max = 0.02;
    let trajectories = 8;

    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| map_seeds(7, trajectories, |_, rng| run_one(&params, rng, t_max)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| map_seeds_sequential(7, trajectories, |_, rng| run_one(&params, rng, t_max)))
    });
    group.finish();
}

criterion_group!(benches, bench_ensemble);
criterion_main!(benches);
