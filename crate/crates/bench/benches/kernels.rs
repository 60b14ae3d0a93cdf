use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use resonance_bench::{gal_set, near_half_set, table};
use resonance_core::analytic::{zeta_oracle, Evaluator, Target};
use resonance_core::quadform::resonance_ratio;
use resonance_core::sieve_primes;

fn sieve(c: &mut Criterion) {
    c.bench_function("sieve 1e6", |b| b.iter(|| sieve_primes(black_box(1_000_000)).unwrap()));
}

fn ratio(c: &mut Criterion) {
    let t = table();
    let gal = gal_set(&t);
    let nh = near_half_set(&t, 2000);
    c.bench_function("resonance_ratio gal 729", |b| {
        b.iter(|| resonance_ratio(black_box(&gal), 0.75, f64::INFINITY).unwrap())
    });
    c.bench_function("resonance_ratio near-half 2000", |b| {
        b.iter(|| resonance_ratio(black_box(&nh), 0.6, f64::INFINITY).unwrap())
    });
}

fn grid(c: &mut Criterion) {
    let ev = Evaluator::new(Target::Zeta { sigma: 0.5, x: 1e4 }).unwrap();
    c.bench_function("zeta grid 4096 x 1e4 terms", |b| {
        b.iter(|| ev.eval_grid(black_box(5000.0), 0.01, 4096))
    });
    c.bench_function("zeta pointwise 1e4 terms", |b| b.iter(|| ev.eval(black_box(7777.7))));
}

fn oracle(c: &mut Criterion) {
    c.bench_function("zeta_oracle t=1000", |b| b.iter(|| zeta_oracle(0.5, black_box(1000.0)).unwrap()));
}

criterion_group!(benches, sieve, ratio, grid, oracle);
criterion_main!(benches);
