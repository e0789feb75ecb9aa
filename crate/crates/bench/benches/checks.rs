use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qe_core::homogeneous::{qe_solve, SolveOptions};
use qe_core::qe::{gamma_solve, qe_residual, GammaOptions, QEData, Tolerances};
use qe_core::zoo::{construct, Generator};
use qe_core::{Bindings, ChartGrid, GeneratorSpec, Geometry, LieAlgebraModel, MetricField, ScalarField};

fn torus_spec(n: usize) -> GeneratorSpec {
    GeneratorSpec::new(Generator::TorusOfRevolution { r0: 2.0, r: 1.0 }).with_resolution(n)
}

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("curvature");
    for n in [32, 64] {
        group.bench_function(format!("torus_of_revolution/{n}"), |b| {
            b.iter(|| {
                let geo = construct(&torus_spec(n)).unwrap().0.geometry;
                black_box(geo.scalar_curvature().sup_abs())
            })
        });
    }
    group.finish();
}

fn residual(c: &mut Criterion) {
    let geo = construct(&torus_spec(64)).unwrap().0.geometry;
    let x = geo.gradient(&ScalarField::parse(geo.chart(), "sin(u1)*cos(u2)", &Bindings::new()).unwrap());
    let qe = QEData::new(3.0, 0.5, x).unwrap();
    let tol = Tolerances::default();
    c.bench_function("qe_residual/torus_64", |b| b.iter(|| black_box(qe_residual(&geo, &qe, &tol).unwrap())));
}

fn gamma(c: &mut Criterion) {
    let mut group = c.benchmark_group("gamma_solve");
    group.sample_size(10);
    for n in [16, 32] {
        let geo = Geometry::new(MetricField::euclidean(&ChartGrid::uniform(2, n).build().unwrap()));
        let x = geo.gradient(&ScalarField::parse(geo.chart(), "sin(u1)", &Bindings::new()).unwrap());
        group.bench_function(format!("flat_gradient/{n}"), |b| {
            b.iter(|| black_box(gamma_solve(&geo, &x, 2.0, &GammaOptions::default()).unwrap()))
        });
    }
    group.finish();
}

fn homogeneous(c: &mut Criterion) {
    let l = LieAlgebraModel::berger(2.0).unwrap();
    let opts = SolveOptions::default();
    let mut group = c.benchmark_group("qe_solve");
    group.sample_size(10);
    group.bench_function("berger_a2_m2", |b| b.iter(|| black_box(qe_solve(&l, 2.0, &opts).unwrap())));
    group.finish();
}

criterion_group!(benches, curvature, residual, gamma, homogeneous);
criterion_main!(benches);
