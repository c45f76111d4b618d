use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use lipfree::free_norm::{free_norm, Backend, Molecule};
use lipfree::metric::{NormKind, PointedMetricSpace};
use lipfree::par::{max_parallel, max_sequential, pairs};

fn cloud(n: usize, seed: u64) -> PointedMetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n).map(|_| vec![rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)]).collect();
    PointedMetricSpace::build(pts, NormKind::Euclidean, 1.0, 0).unwrap()
}

// Lipschitz ratio of x ↦ w(x) δ(x) for a radial weight, over all pairs.
fn bench_pairs(c: &mut Criterion) {
    let mut group = c.benchmark_group("lipschitz_pairs");
    group.sample_size(10);
    for &(n, p) in &[(40usize, 1.0f64), (40, 0.5)] {
        let space = cloud(n, 7);
        let images: Vec<Molecule> = (0..n)
            .map(|x| Molecule::delta(&space, x).scaled(1.0 / (1.0 + space.dist_to_base(x))))
            .collect();
        let backend = Backend::default();
        let all = pairs(n);
        let ratio = |(i, j): (usize, usize)| {
            let diff = images[i].sub(&images[j]);
            Ok(free_norm(&space, &diff, p, &backend)?.value / space.d(i, j))
        };
        let label = format!("n{n}_p{p}");
        group.bench_with_input(BenchmarkId::new("sequential", &label), &all, |b, all| {
            b.iter(|| black_box(max_sequential(all, ratio).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("parallel", &label), &all, |b, all| {
            b.iter(|| black_box(max_parallel(all, ratio).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_pairs);
criterion_main!(benches);
