use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use weakring::embedding::{build_embedding, spectral_stats};
use weakring::sampling::{sample_lattice_gaussian, GaussianSpec, Truncation};
use weakring::IntPolynomial;
use weakring_bench::SEED;

fn construction(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_embedding");
    g.sample_size(10);
    for n in [16usize, 32, 64] {
        let f = IntPolynomial::trinomial(n, 16, 12);
        for prec in [128u32, 300] {
            g.bench_with_input(BenchmarkId::new(format!("{prec}bit"), n), &f, |b, f| {
                b.iter(|| build_embedding(black_box(f), prec).unwrap())
            });
        }
    }
    g.finish();
}

fn lattice_sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("lattice_gaussian");
    g.sample_size(20);
    for n in [16usize, 64] {
        let emb = build_embedding(&IntPolynomial::trinomial(n, 16, 12), 160).unwrap();
        let spec = GaussianSpec::from_sigma(3.0, Truncation::NormWarnOnly)
            .unwrap()
            .with_det_root(emb.det_root().to_f64());
        let mut rng = ChaCha20Rng::seed_from_u64(SEED);
        g.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| sample_lattice_gaussian(&emb, &spec, &mut rng).unwrap())
        });
    }
    g.finish();
}

fn spectral(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectral_stats");
    g.sample_size(10);
    for n in [16usize, 64] {
        let emb = build_embedding(&IntPolynomial::trinomial(n, 16, 12), 160).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &emb, |b, emb| b.iter(|| spectral_stats(black_box(emb), None, None).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, construction, lattice_sampling, spectral);
criterion_main!(benches);
