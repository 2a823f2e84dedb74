use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use quadlab_core::stability::{hyers_iterate, series_bound};
use quadlab_core::{
    stabilize, ControlFunction, Direction, Mapping, ModulePoint, QuasiNormSpec, Setting, StabilityConfig,
};

fn iterate(c: &mut Criterion) {
    let f = Mapping::perturbed(Mapping::square(), Mapping::Sine, 0.1);
    let x = ModulePoint::from_reals(&[2.5]);
    let mut g = c.benchmark_group("hyers_iterate");
    for m in [10, 30, 60] {
        g.bench_with_input(BenchmarkId::new("backward", m), &m, |b, &m| {
            b.iter(|| hyers_iterate(&f, 3, m, black_box(&x), Direction::Backward).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("forward", m), &m, |b, &m| {
            b.iter(|| hyers_iterate(&f, 3, m, black_box(&x), Direction::Forward).unwrap())
        });
    }
    g.finish();
}

fn engine(c: &mut Criterion) {
    let f = Mapping::perturbed(Mapping::square(), Mapping::Sine, 0.1);
    let probes: Vec<ModulePoint> = (1..=100).map(|i| ModulePoint::from_reals(&[i as f64 / 10.0])).collect();
    let cfg = StabilityConfig::new(3, QuasiNormSpec::euclidean(1), probes);
    let phi = ControlFunction::Constant { theta: 1.2 };
    c.bench_function("stabilize 100 probes", |b| b.iter(|| stabilize(&f, black_box(&phi), &cfg).unwrap()));
}

fn series(c: &mut Criterion) {
    let x = ModulePoint::from_reals(&[1.0, -2.0]);
    let norm = QuasiNormSpec::lp(0.5, 2).unwrap();
    let phi = ControlFunction::Power { epsilon: 1.0, r: 1.0 };
    let mut g = c.benchmark_group("series_bound");
    for (name, setting) in [("K=2", Setting::Quasi { k: 2.0 }), ("p=0.5", Setting::PNorm { p: 0.5 })] {
        for dir in [Direction::Forward, Direction::Backward] {
            let id = BenchmarkId::new(name, format!("{dir:?}"));
            g.bench_function(id, |b| {
                b.iter(|| series_bound(&phi, &norm, 4, setting, dir, black_box(&x), 1e-12))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, iterate, engine, series);
criterion_main!(benches);
