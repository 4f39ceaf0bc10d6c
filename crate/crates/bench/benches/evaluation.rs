use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spbench_bench as fx;
use spbench_core::Problem;

fn evaluation(c: &mut Criterion) {
    let instances = [
        fx::phi4(4, 0.5),
        fx::xy(2, 6, 1),
        fx::xy(3, 4, 1),
        fx::thomson(12),
        fx::lj(13),
        fx::morse(13, 6.0),
        fx::nash(&[3, 3, 3], 1),
        fx::puzzle(2, 2, 1),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for inst in &instances {
        let x = inst.sample_start(&mut rng);
        let mut g = c.benchmark_group(inst.label.clone());
        g.bench_function(BenchmarkId::new("energy", inst.dim()), |b| b.iter(|| inst.energy(black_box(&x)).unwrap()));
        g.bench_function(BenchmarkId::new("gradient", inst.dim()), |b| b.iter(|| inst.gradient(black_box(&x)).unwrap()));
        g.bench_function(BenchmarkId::new("hessian", inst.dim()), |b| b.iter(|| inst.hessian(black_box(&x)).unwrap()));
        g.finish();
    }
}

criterion_group!(benches, evaluation);
criterion_main!(benches);
