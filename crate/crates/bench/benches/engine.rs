use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tropcyl_core::fixtures::{cubic, p1xp1};
use tropcyl_core::{
    build_deformation, contributing_classes, count_primitive_cylinder, generate_walls,
    replay_induction, splitting_sum, Anchors, ClassKind, ElementaryCountTable, LatticeVector,
    PrimitiveCylinder,
};

fn walls(c: &mut Criterion) {
    let model = cubic();
    c.bench_function("walls/cubic steps 4 norm 10", |b| {
        b.iter(|| generate_walls(black_box(&model), 4, 10))
    });
}

fn counting(c: &mut Criterion) {
    let model = p1xp1(&[3, 3, 3, 3]).expect("valid");
    let twig = [
        LatticeVector::new(1, 0),
        LatticeVector::new(0, 1),
        LatticeVector::new(-1, 0),
    ];
    let cyl = PrimitiveCylinder::canonical(&model, &twig).expect("primitive");
    let table = ElementaryCountTable::new();
    let beta = contributing_classes(&table, &cyl).expect("classes")[13]
        .class
        .clone();

    c.bench_function("cylinder/canonical t=3", |b| {
        b.iter(|| PrimitiveCylinder::canonical(black_box(&model), &twig))
    });
    c.bench_function("count/closed form t=3", |b| {
        b.iter(|| count_primitive_cylinder(&table, black_box(&cyl), &beta, ClassKind::Extended))
    });
    c.bench_function("count/splitting sum t=3", |b| {
        b.iter(|| splitting_sum(&table, black_box(&cyl), &beta, ClassKind::Extended))
    });

    let data = build_deformation(&cyl, &Anchors::default()).expect("deformation");
    let infinitesimal = &beta - cyl.delta_hat();
    c.bench_function("deformation/build t=3", |b| {
        b.iter(|| build_deformation(black_box(&cyl), &Anchors::default()))
    });
    c.bench_function("deformation/replay t=3", |b| {
        b.iter(|| replay_induction(black_box(&data), &table, &infinitesimal))
    });
}

criterion_group!(benches, walls, counting);
criterion_main!(benches);
