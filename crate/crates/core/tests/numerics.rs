use proptest::prelude::*;
use rand::Rng;
use radca::numerics::{power_iteration_extreme_eigs, sym_eigendecomp, DenseSymmetricMatrix, SparseMatrixCSR};
use radca::rng::stream;

fn random_symmetric(n: usize, seed: u64) -> DenseSymmetricMatrix {
    let mut r = stream(seed, &[1]);
    DenseSymmetricMatrix::from_fn(n, |_, _| r.random_range(-1.0..1.0)).unwrap()
}

fn sparse_strategy() -> impl Strategy<Value = (SparseMatrixCSR, Vec<f64>)> {
    (1usize..12, 1usize..12).prop_flat_map(|(rows, cols)| {
        (
            prop::collection::vec(prop::collection::btree_map(0..cols, -10.0f64..10.0, 0..=cols), rows),
            prop::collection::vec(-5.0f64..5.0, cols),
        )
            .prop_map(move |(rs, z)| {
                let rows: Vec<Vec<(usize, f64)>> = rs.into_iter().map(|m| m.into_iter().collect()).collect();
                (SparseMatrixCSR::from_rows(cols, &rows).unwrap(), z)
            })
    })
}

proptest! {
    #[test]
    fn csr_matvec_is_bit_reproducible((a, z) in sparse_strategy()) {
        let y1 = a.matvec(&z);
        let y2 = a.matvec(&z);
        prop_assert_eq!(y1.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), y2.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        for (r, yr) in y1.iter().enumerate() {
            let dense: f64 = a.row_dense(r).iter().zip(&z).map(|(u, v)| u * v).sum();
            prop_assert!((dense - yr).abs() <= 1e-12 * (1.0 + dense.abs()));
        }
    }
}

#[test]
fn eigendecomposition_is_orthonormal_and_reconstructs() {
    for seed in 0..200u64 {
        let n = 1 + (seed as usize * 7) % 50;
        let a = random_symmetric(n, seed);
        let e = sym_eigendecomp(&a, 512).unwrap();
        let v = &e.vectors;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| v.get(k, i) * v.get(k, j)).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() <= 1e-10, "seed {seed}: VᵀV off by {}", (dot - want).abs());
            }
        }
        let back = e.reconstruct_with(|l| l).unwrap();
        let tol = 1e-8 * (1.0 + a.max_abs());
        for i in 0..n {
            for j in 0..n {
                assert!((back.get(i, j) - a.get(i, j)).abs() <= tol, "seed {seed}: reconstruction");
            }
        }
        assert!(e.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn power_iteration_matches_jacobi_extremes() {
    let mut tested = 0;
    let mut seed = 1000u64;
    while tested < 100 {
        seed += 1;
        let n = 2 + (seed as usize) % 30;
        let a = random_symmetric(n, seed);
        let e = sym_eigendecomp(&a, 512).unwrap();
        let vals = e.values.as_slice();
        let gap_top = vals[n - 1] - vals[n - 2];
        let gap_bottom = vals[1] - vals[0];
        if gap_top < 0.1 || gap_bottom < 0.1 {
            continue;
        }
        tested += 1;
        let (hi, lo) = power_iteration_extreme_eigs(&a, 100_000, 1e-14).unwrap();
        let scale = vals[0].abs().max(vals[n - 1].abs());
        assert!((hi - e.lambda_max()).abs() <= 1e-6 * scale, "seed {seed}: max {hi} vs {}", e.lambda_max());
        assert!((lo - e.lambda_min()).abs() <= 1e-6 * scale, "seed {seed}: min {lo} vs {}", e.lambda_min());
    }
}

#[test]
fn eig_rejects_oversized_input() {
    let a = DenseSymmetricMatrix::identity(6).unwrap();
    assert!(sym_eigendecomp(&a, 5).is_err());
}
