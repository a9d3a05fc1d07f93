mod common;

use common::{build, random_point, random_raw, raw_piece_gradient};
use radca::model::{BlockActive, BlockKind, Bounds, ConvexPart, DcProgram, MaxBlock, SmoothPiece};
use radca::numerics::{ops, DenseSymmetricMatrix};
use radca::subproblem::{descent_check, kkt_violation, prox_step, solve_box_qp, ProxConfig};

fn spd(n: usize, seed: u64, shift: f64) -> DenseSymmetricMatrix {
    let b: Vec<Vec<f64>> = (0..n).map(|i| random_point(seed * 53 + i as u64, n, 1.0)).collect();
    DenseSymmetricMatrix::from_fn(n, |i, j| {
        (0..n).map(|k| b[i][k] * b[j][k]).sum::<f64>() + if i == j { shift } else { 0.0 }
    })
    .unwrap()
}

/// Dense Gaussian elimination with partial pivoting.
fn solve_dense(h: &DenseSymmetricMatrix, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| h.get(i, j)).chain([rhs[i]]).collect()).collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..=n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (a[r][n] - s) / a[r][r];
    }
    x
}

fn qp_value(h: &DenseSymmetricMatrix, f: &[f64], x: &[f64]) -> f64 {
    0.5 * h.quad_form(x) + ops::dot(f, x)
}

fn random_box(n: usize, seed: u64) -> Bounds {
    let lo = random_point(seed, n, 1.0);
    let width = random_point(seed + 1, n, 1.0);
    Bounds { upper: lo.iter().zip(&width).map(|(l, w)| l + 0.1 + w.abs()).collect(), lower: lo }
}

fn boxed_program(n: usize, seed: u64, bounds: Bounds) -> DcProgram {
    let g = ConvexPart::general_quad(spd(n, seed, 0.3), random_point(seed + 5, n, 1.0), 0.0).unwrap();
    let block = MaxBlock::new(BlockKind::Pieces(vec![SmoothPiece::affine(vec![0.0; n], 0.0).unwrap()]), 1.0).unwrap();
    DcProgram::new(g, vec![block], Some(bounds), 0.0).unwrap()
}

#[test]
fn every_prox_step_satisfies_descent() {
    let cfg = ProxConfig::default();
    for seed in 0..300u64 {
        let raw = random_raw(seed, 6);
        let p = build(&raw);
        let x = random_point(seed + 3, raw.n, 1.5);
        let eps = (seed % 4) as f64 * 0.3;
        let active = p.active_set(&x, eps).unwrap();
        // A random hull point of each block's ε-active gradients.
        let mut v = vec![0.0; raw.n];
        for (l, ((w, ps), a)) in raw.blocks.iter().zip(&active.blocks).enumerate() {
            let BlockActive::Pieces(ids) = a else { unreachable!() };
            let mut wts: Vec<f64> = random_point(seed * 7 + l as u64, ids.len(), 1.0).iter().map(|t| t.abs() + 1e-3).collect();
            let s: f64 = wts.iter().sum();
            wts.iter_mut().for_each(|t| *t /= s);
            for (&i, t) in ids.iter().zip(&wts) {
                ops::axpy(w * t, &raw_piece_gradient(&ps[i], &x), &mut v);
            }
        }
        let step = prox_step(&p, &x, &v, &cfg).unwrap();
        assert!(step.converged, "seed {seed}");
        let (f0, f1) = (p.eval(&x).unwrap(), p.eval(&step.x).unwrap());
        let mu = cfg.mu(p.g());
        let slack = p.descent_slack(&active);
        assert!(descent_check(f0, f1, ops::dist2(&x, &step.x), slack, mu), "seed {seed}: {f0} -> {f1}");
    }
}

#[test]
fn stationary_points_are_prox_fixed_points() {
    let cfg = ProxConfig::default();
    for seed in 0..200u64 {
        let raw = random_raw(seed, 8);
        let p = build(&raw);
        let x = random_point(seed, raw.n, 1.0);
        let v = p.grad_g(&x).unwrap();
        let y = prox_step(&p, &x, &v, &cfg).unwrap();
        assert!(ops::dist2(&x, &y.x) <= 10.0 * cfg.qp_tol * (1.0 + ops::norm2(&v)), "seed {seed}");

        let n = 1 + (seed as usize) % 6;
        let bx = random_box(n, seed);
        let q = boxed_program(n, seed, bx.clone());
        let mut z = random_point(seed + 9, n, 3.0);
        ops::clip_box(&mut z, &bx.lower, &bx.upper);
        let y = prox_step(&q, &z, &q.grad_g(&z).unwrap(), &cfg).unwrap();
        assert!(ops::dist2(&z, &y.x) <= 10.0 * cfg.qp_tol * (1.0 + ops::norm2(&z)), "boxed seed {seed}");
    }
}

#[test]
fn box_qp_beats_the_clipped_minimizer() {
    for seed in 0..200u64 {
        let n = 1 + (seed as usize) % 10;
        let h = spd(n, seed, if seed % 3 == 0 { 0.0 } else { 0.2 });
        let f = random_point(seed + 2, n, 2.0);
        let bx = random_box(n, seed + 4);
        let sol = solve_box_qp(&h, &f, &bx, 1e-9, 10_000).unwrap();
        assert!(bx.contains(&sol.x));
        let grad = ops::add(&h.matvec(&sol.x), &f);
        assert!((kkt_violation(&bx, &sol.x, &grad) - sol.kkt_residual).abs() <= 1e-12 + 1e-9 * sol.kkt_residual);
        if seed % 3 != 0 {
            let mut c = solve_dense(&h, &ops::scale(-1.0, &f));
            ops::clip_box(&mut c, &bx.lower, &bx.upper);
            let (a, b) = (qp_value(&h, &f, &sol.x), qp_value(&h, &f, &c));
            assert!(a <= b + 1e-9 * (1.0 + b.abs()), "seed {seed}: {a} > {b}");
        }
    }
}

#[test]
fn strongly_convex_box_qp_has_one_answer() {
    let cfg = ProxConfig { sigma: Some(0.0), ..ProxConfig::default() };
    for seed in 0..100u64 {
        let n = 2 + (seed as usize) % 8;
        let bx = random_box(n, seed + 40);
        let p = boxed_program(n, seed, bx.clone());
        let v = random_point(seed + 77, n, 3.0);
        let starts: Vec<Vec<f64>> = (0..2)
            .map(|s| {
                (0..n)
                    .map(|i| {
                        let t = 0.1 + 0.8 * random_point(seed * 3 + s, n, 1.0)[i].abs();
                        bx.lower[i] + t * (bx.upper[i] - bx.lower[i])
                    })
                    .collect()
            })
            .collect();
        let a = prox_step(&p, &starts[0], &v, &cfg).unwrap();
        let b = prox_step(&p, &starts[1], &v, &cfg).unwrap();
        assert!(a.converged && b.converged);
        assert!(ops::max_abs_diff(&a.x, &b.x) <= 100.0 * cfg.qp_tol, "seed {seed}: {}", ops::max_abs_diff(&a.x, &b.x));
    }
}

#[test]
fn descent_check_boundaries() {
    assert!(descent_check(1.0, 0.5, 1.0, 0.0, 1.0));
    assert!(!descent_check(1.0, 0.6, 1.0, 0.0, 1.0));
    assert!(descent_check(1.0, 0.6, 1.0, 0.1, 1.0));
}
