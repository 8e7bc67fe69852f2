use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use avoider_bench::{random_interval_set, rq};
use avoider_core::{
    exceptional_probe, fractional_orbit, lemma41_exact_measure, min_unit_window_measure,
    parse_value, CongruenceCase, GridSpec, Rat, SequenceSpec, Window,
};
use num_traits::Zero;

fn bench_boolean_ops(c: &mut Criterion) {
    let a = random_interval_set(1, 1000, 50);
    let b = random_interval_set(2, 1000, 50);
    let mut g = c.benchmark_group("interval");
    g.bench_function("intersect_1k_parts", |bench| {
        bench.iter(|| black_box(a.intersect(&b)))
    });
    g.bench_function("difference_1k_parts", |bench| {
        bench.iter(|| black_box(a.difference(&b)))
    });
    g.finish();
}

fn bench_unit_window_sweep(c: &mut Criterion) {
    let s = random_interval_set(3, 2000, 50);
    let w = Window::new(rq(-20_000, 1), rq(24_000, 1)).unwrap();
    c.bench_function("min_unit_window_sweep_2k_parts", |bench| {
        bench.iter(|| black_box(min_unit_window_measure(&s, &w)))
    });
}

fn bench_orbit_scan(c: &mut Criterion) {
    let powers = SequenceSpec::integer_power(2).unwrap();
    let x = rq(1, 999);
    let mut g = c.benchmark_group("orbit");
    g.bench_function("residue_orbit_100k", |bench| {
        bench.iter(|| black_box(fractional_orbit(&powers, &x, &Rat::zero(), 100_000)))
    });
    let grid = GridSpec::new(Rat::zero(), rq(1, 512), 513).unwrap();
    g.bench_function("probe_513_dilations_2k_terms", |bench| {
        bench.iter(|| black_box(exceptional_probe(&powers, &rq(2, 5), 2000, &grid)))
    });
    g.finish();
}

fn bench_overlap_measure(c: &mut Criterion) {
    let alpha = parse_value("sqrt2@1e-12").unwrap().value;
    let w = Window::new(Rat::zero(), rq(10_000, 1)).unwrap();
    let case = CongruenceCase::new(alpha, rq(1, 1), rq(1, 10), w).unwrap();
    c.bench_function("overlap_exact_measure_1e4_window", |bench| {
        bench.iter(|| black_box(lemma41_exact_measure(&case)))
    });
}

criterion_group!(
    benches,
    bench_boolean_ops,
    bench_unit_window_sweep,
    bench_orbit_scan,
    bench_overlap_measure
);
criterion_main!(benches);
