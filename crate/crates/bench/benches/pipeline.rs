use criterion::{criterion_group, criterion_main, Criterion};
use lmo_core::kontsevich::{check_z, ZContext};
use lmo_core::links::{from_braid, BraidWord};
use lmo_core::lmo::{iota, omega_n, t_m, unknot_presentation};
use lmo_core::spaces::{Reducer, RelationSet};

fn hopf() -> lmo_core::LinkDiagram {
    from_braid(&BraidWord {
        strands: 2,
        word: vec![1, 1],
    })
    .unwrap()
}

fn bench_reduce(c: &mut Criterion) {
    let t5 = t_m(5).unwrap();
    c.bench_function("reduce t_5 mod AS+IHX", |b| {
        b.iter(|| {
            let mut red = Reducer::new(RelationSet::ihx_only());
            red.reduce(std::hint::black_box(&t5)).unwrap()
        })
    });
}

fn bench_z(c: &mut Criterion) {
    let d = hopf();
    c.bench_function("check_z Hopf cap 2 (cold cache)", |b| {
        b.iter(|| {
            let mut ctx = ZContext::new();
            check_z(std::hint::black_box(&d), 2, &mut ctx).unwrap()
        })
    });
    c.bench_function("check_z Hopf cap 2 (warm cache)", |b| {
        let mut ctx = ZContext::new();
        check_z(&d, 2, &mut ctx).unwrap();
        b.iter(|| check_z(std::hint::black_box(&d), 2, &mut ctx).unwrap())
    });
}

fn bench_iota(c: &mut Criterion) {
    let mut ctx = ZContext::new();
    let z = check_z(&hopf(), 2, &mut ctx).unwrap();
    c.bench_function("iota_1 of Hopf integral", |b| {
        b.iter(|| iota(std::hint::black_box(&z), 1).unwrap())
    });
}

fn bench_omega(c: &mut Criterion) {
    c.bench_function("omega_1 of unknot(2)", |b| {
        b.iter(|| {
            let mut ctx = ZContext::new();
            omega_n(&unknot_presentation(2), 1, &mut ctx).unwrap()
        })
    });
}

criterion_group!(benches, bench_reduce, bench_z, bench_iota, bench_omega);
criterion_main!(benches);
