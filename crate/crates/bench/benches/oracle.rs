use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use quadlab_core::finite::enumerate_constraints;
use quadlab_core::{nullspace_basis, spaces_equal, EquationSpec, GroupSpec};

fn constraints(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate_constraints");
    for (q, d) in [(5, 1), (7, 1), (5, 2)] {
        let group = GroupSpec::new(q, d).unwrap();
        g.bench_with_input(BenchmarkId::new("fe3:3", format!("F_{q}^{d}")), &group, |b, group| {
            b.iter(|| enumerate_constraints(black_box(&EquationSpec::Fe3 { n: 3 }), group).unwrap())
        });
    }
    g.finish();
}

fn nullspace(c: &mut Criterion) {
    let mut g = c.benchmark_group("nullspace_basis");
    for (q, d) in [(5, 1), (7, 1), (5, 2)] {
        let group = GroupSpec::new(q, d).unwrap();
        let m = enumerate_constraints(&EquationSpec::Fe1, &group).unwrap();
        g.bench_with_input(BenchmarkId::new("fe1", format!("F_{q}^{d}")), &m, |b, m| {
            b.iter(|| nullspace_basis(black_box(m)))
        });
    }
    g.finish();
}

fn compare(c: &mut Criterion) {
    let group = GroupSpec::new(7, 1).unwrap();
    c.bench_function("spaces_equal fe2 fe1 F_7", |b| {
        b.iter(|| spaces_equal(&EquationSpec::Fe2, &EquationSpec::Fe1, black_box(&group)).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = constraints, nullspace, compare
}
criterion_main!(benches);
