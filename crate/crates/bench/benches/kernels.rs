use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use radca::driver::{run, Rule, SolverConfig};
use radca::instances::{build_qubo_penalty, dc_split_shift, gen_signed_pair_affine, random_qubo, synthetic_sparse};
use radca::lp::{solve_chebyshev, LpConfig};
use radca::numerics::DenseMatrix;
use radca::oracles::oracle_enumerate_qubo;
use radca::sketch::{draw_sketch, SketchKind};
use radca::subproblem::{prox_step, ProxConfig};

fn wave(len: usize, phase: f64) -> Vec<f64> {
    (0..len).map(|i| (i as f64 * 0.7 + phase).sin()).collect()
}

fn sparse(c: &mut Criterion) {
    let x = synthetic_sparse(2000, 500, 20, 1).unwrap();
    let w = wave(500, 0.3);
    let y = wave(2000, 1.1);
    c.bench_function("csr_matvec_2000x500", |b| b.iter(|| x.matvec(black_box(&w))));
    c.bench_function("csr_matvec_t_2000x500", |b| b.iter(|| x.matvec_t(black_box(&y))));
}

fn lp(c: &mut Criterion) {
    let cfg = LpConfig::default();
    for (m, r) in [(20, 10), (40, 50)] {
        let a = DenseMatrix::from_row_major(m, r, wave(m * r, 0.0)).unwrap();
        let rhs = wave(m, 2.0);
        c.bench_function(&format!("chebyshev_{m}x{r}"), |b| b.iter(|| solve_chebyshev(&a, black_box(&rhs), &cfg).unwrap()));
    }
}

fn sketch(c: &mut Criterion) {
    let mut seed = 0u64;
    c.bench_function("gaussian_sketch_40x500", |b| {
        b.iter(|| {
            seed += 1;
            draw_sketch(40, 500, SketchKind::GaussianRows, seed).unwrap()
        })
    });
}

fn prox(c: &mut Criterion) {
    let q = random_qubo(50, 3).unwrap();
    let p = build_qubo_penalty(&dc_split_shift(&q.q).unwrap(), 1.0).unwrap();
    let x = vec![0.5; 50];
    let v = wave(50, 0.5);
    let cfg = ProxConfig::default();
    c.bench_function("box_prox_qubo50", |b| b.iter(|| prox_step(&p, &x, black_box(&v), &cfg).unwrap()));
}

fn solver(c: &mut Criterion) {
    let p = gen_signed_pair_affine(20, 40, 2).unwrap();
    let x0 = vec![0.0; 20];
    let cfg = SolverConfig::default().with_rule(Rule::Ra);
    c.bench_function("ra_dca_signed_pair_20", |b| b.iter(|| run(&p, black_box(&x0), &cfg).unwrap()));
}

fn qubo(c: &mut Criterion) {
    let q = random_qubo(16, 5).unwrap();
    c.bench_function("enumerate_qubo_16", |b| b.iter(|| oracle_enumerate_qubo(black_box(&q.q)).unwrap()));
}

criterion_group!(benches, sparse, lp, sketch, prox, solver, qubo);
criterion_main!(benches);
