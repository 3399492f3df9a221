use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qws::gauge::{gauge_fix_elimination, gauge_fix_recursive};
use qws::lattice::jacobi_check;
use qws::miura::{fr_bracket_coeff, miura_transform};
use qws::rmatrix::{cayley_r0, r0_spectral};
use qws::LatticeR;
use qws_bench::{cell_point, coxeter, lattice_point, miura_data};

fn gauge_fixing(c: &mut Criterion) {
    let mut g = c.benchmark_group("gauge_fix");
    for n in [2, 3, 4] {
        let l = cell_point(n);
        g.bench_function(format!("elimination_n{}", n), |b| b.iter(|| gauge_fix_elimination(black_box(&l)).unwrap()));
        g.bench_function(format!("recursive_n{}", n), |b| b.iter(|| gauge_fix_recursive(black_box(&l)).unwrap()));
    }
    g.finish();
}

fn miura(c: &mut Criterion) {
    let md = miura_data(4);
    c.bench_function("miura_transform_n4", |b| b.iter(|| miura_transform(black_box(&md))));
    c.bench_function("fr_bracket_coeff_n4", |b| b.iter(|| fr_bracket_coeff(4, 1, 3, black_box(2)).unwrap()));
}

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("r0");
    for label in ["A4", "D4", "G2"] {
        let cd = coxeter(label);
        g.bench_function(format!("cayley_{}", label), |b| b.iter(|| cayley_r0(black_box(&cd))));
        g.bench_function(format!("spectral_{}", label), |b| b.iter(|| r0_spectral(black_box(&cd))));
    }
    g.finish();
}

fn lattice(c: &mut Criterion) {
    let mut g = c.benchmark_group("lattice");
    g.sample_size(10);
    for len in [3, 5] {
        let r = LatticeR::new(2, len).unwrap();
        let l = lattice_point(2, len);
        g.bench_function(format!("bivector_N{}", len), |b| b.iter(|| r.bivector(black_box(l.sites()))));
        g.bench_function(format!("jacobi_N{}", len), |b| b.iter(|| jacobi_check(&r, black_box(&l)).is_ok()));
    }
    g.finish();
}

criterion_group!(benches, gauge_fixing, miura, kernels, lattice);
criterion_main!(benches);
