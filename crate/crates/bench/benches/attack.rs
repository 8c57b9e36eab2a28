use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use weakring::attack::guess::{sweep, SurvivorTest};
use weakring::attack::{evaluate_samples, AttackOptions};
use weakring::{Integer, PrimeModulus, RootInfo};
use weakring_bench::family_samples;

// primes near 2^16, 2^18 and 2^20
const MODULI: [u64; 3] = [65521, 262139, 1048573];

fn guess_loop(c: &mut Criterion) {
    let mut g = c.benchmark_group("guess_loop");
    g.sample_size(10);
    let opts = AttackOptions::default();
    for q in MODULI {
        let set = family_samples(64, q, 40);
        let qm = PrimeModulus::new(q).unwrap();
        let one = RootInfo::new(Integer::from(1), Some(Integer::from(1)), &qm);
        let ev = evaluate_samples(&set, &one, &opts).unwrap();
        g.throughput(Throughput::Elements(q));
        g.bench_with_input(BenchmarkId::new("small_error", q), &ev, |b, ev| {
            b.iter(|| sweep(black_box(ev), SurvivorTest::SmallError, &opts).unwrap())
        });
        let s: Vec<u64> = (0..=200).chain(q - 200..q).collect();
        g.bench_with_input(BenchmarkId::new("small_set", q), &ev, |b, ev| {
            b.iter(|| sweep(black_box(ev), SurvivorTest::SmallSet(&s), &opts).unwrap())
        });
    }
    g.finish();
}

fn evaluation(c: &mut Criterion) {
    let mut g = c.benchmark_group("evaluate_samples");
    let opts = AttackOptions::default();
    for n in [256, 1024] {
        let q = 1048573;
        let set = family_samples(n, q, 40);
        let qm = PrimeModulus::new(q).unwrap();
        let one = RootInfo::new(Integer::from(1), Some(Integer::from(1)), &qm);
        g.bench_with_input(BenchmarkId::from_parameter(n), &set, |b, set| {
            b.iter(|| evaluate_samples(black_box(set), &one, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, guess_loop, evaluation);
criterion_main!(benches);
