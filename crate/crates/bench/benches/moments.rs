use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use leibniz_core::inequalities::{leibniz_defect, real};
use leibniz_core::ncalg::{commutator_dirac_norm, AlgebraElement, DensityState};
use leibniz_core::projections::{franchetti_norm, DEFAULT_FRANCHETTI_GRID};
use leibniz_core::sampling::{real_box, simplex_measure, stream_rng};
use leibniz_core::{centered_moment, Exponent};

fn moments(c: &mut Criterion) {
    let mut group = c.benchmark_group("centered_moment");
    for n in [8, 64, 512] {
        let mut rng = stream_rng(1, n as u64);
        let mu = simplex_measure(&mut rng, n);
        let f = real(&real_box(&mut rng, n));
        for p in [Exponent::ONE, Exponent::new(1.5).unwrap(), Exponent::Infinity] {
            group.bench_with_input(BenchmarkId::new(p.to_string(), n), &n, |b, _| {
                b.iter(|| centered_moment(black_box(&f), black_box(&mu), p).unwrap())
            });
        }
    }
    group.finish();
}

fn leibniz(c: &mut Criterion) {
    let mut rng = stream_rng(2, 0);
    let mu = simplex_measure(&mut rng, 16);
    let f = real(&real_box(&mut rng, 16));
    let g = real(&real_box(&mut rng, 16));
    c.bench_function("leibniz_defect n=16 p=3", |b| {
        b.iter(|| leibniz_defect(black_box(&f), black_box(&g), &mu, Exponent::new(3.0).unwrap()).unwrap())
    });
}

fn commutator(c: &mut Criterion) {
    let mut group = c.benchmark_group("commutator_dirac_norm");
    for d in [2, 3, 4] {
        let mut rng = stream_rng(3, d as u64);
        let w = DensityState::random_faithful(d, &mut rng);
        let a = AlgebraElement::random(d, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| commutator_dirac_norm(black_box(&a), &w).unwrap())
        });
    }
    group.finish();
}

fn franchetti(c: &mut Criterion) {
    c.bench_function("franchetti_norm p=3", |b| {
        b.iter(|| franchetti_norm(black_box(Exponent::new(3.0).unwrap()), DEFAULT_FRANCHETTI_GRID).unwrap())
    });
}

criterion_group!(benches, moments, leibniz, commutator, franchetti);
criterion_main!(benches);
