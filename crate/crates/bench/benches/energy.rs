//! Criterion benchmarks for the quadrature stack on a representative curve.

use criterion::{criterion_group, criterion_main, Criterion};
use hofer_core::*;

fn bench_energies(c: &mut Criterion) {
    let model = EndModel::negative(2, 1.0).unwrap();
    let j = standard_cylindrical_acs(&model);
    let curve = PuncturedCurve::polynomial(curves::monomial_coeffs(model.n, 2), &model).unwrap();
    let cyl = to_cylinder(&curve);

    c.bench_function("e_omega z^2", |b| {
        b.iter(|| e_omega(&cyl, &j, energy::S_MIN_DEFAULT).unwrap())
    });
    c.bench_function("e_symp_a z^2", |b| b.iter(|| e_symp_a(&cyl, 2.0).unwrap()));
    c.bench_function("lambda profile z^2 h=1/64", |b| {
        b.iter(|| lambda_mass_profile(&cyl, &j, 1.0 / 64.0, 32).unwrap())
    });
    c.bench_function("ball area z^2 r=0.4", |b| b.iter(|| ball_area(&cyl, 0.4).unwrap()));
}

criterion_group!(benches, bench_energies);
criterion_main!(benches);
