mod common;

use common::random_point;
use proptest::prelude::*;
use radca::instances::{build_topk_model, synthetic_sparse};
use radca::lp::LpConfig;
use radca::model::Column;
use radca::numerics::ops;
use radca::rules::{
    select_block_aggregate, select_centered, select_full_vertex, select_ra, select_random_vertex, AggregateMode, Branch,
    Geometry,
};
use radca::sketch::{draw_sketch, sampled_vertex_residual, SketchKind, SketchMatrix};
use radca::stationarity::hull_distance;

fn columns(seed: u64, n: usize, r: usize) -> Vec<Vec<f64>> {
    (0..r).map(|i| random_point(seed.wrapping_mul(97).wrapping_add(i as u64), n, 1.0)).collect()
}

fn wrap(cols: &[Vec<f64>]) -> Vec<Column<'_>> {
    cols.iter().map(|c| Column::Slice(c)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn safeguard_dichotomy_is_strict(seed in any::<u64>(), n in 1usize..10, r in 1usize..8, m in 1usize..8) {
        let cols = columns(seed, n, r);
        let g = random_point(seed ^ 0xfeed, n, 1.0);
        let d = draw_sketch(m, n, SketchKind::GaussianRows, seed).unwrap();
        let (r_hat, idx) = sampled_vertex_residual(&d, &wrap(&cols), &g).unwrap();
        let lp = LpConfig::default();

        let at = select_ra(&wrap(&cols), &g, &d, r_hat, &lp).unwrap();
        prop_assert!(matches!(at.branch, Branch::Combination(_)));
        prop_assert_eq!(at.r_hat, Some(r_hat));
        prop_assert!(hull_distance(&cols, &at.v).unwrap() <= 1e-8);

        let below = r_hat * (1.0 - 1e-12) - f64::MIN_POSITIVE;
        if below >= 0.0 {
            let dec = select_ra(&wrap(&cols), &g, &d, below, &lp).unwrap();
            prop_assert_eq!(&dec.branch, &Branch::Vertex(vec![vec![idx]]));
            prop_assert!(!dec.lp_called);
            prop_assert!(dec.lp.is_none());
            prop_assert_eq!(&dec.v, &cols[idx]);
        }
    }

    #[test]
    fn identity_sketch_reduces_to_full_vertex(seed in any::<u64>(), n in 1usize..10, r in 2usize..8) {
        let cols = columns(seed, n, r);
        let g = random_point(seed ^ 0xbeef, n, 1.0);
        let d = SketchMatrix::identity(n);
        let ra = select_ra(&wrap(&cols), &g, &d, 0.0, &LpConfig::default()).unwrap();
        let full = select_full_vertex(&wrap(&cols), &g).unwrap();
        prop_assert_eq!(&ra.branch, &full.branch);
        prop_assert_eq!(&ra.v, &full.v);
    }

    #[test]
    fn reference_rules_pick_hull_points(seed in any::<u64>(), n in 1usize..8, r in 1usize..8) {
        let cols = columns(seed, n, r);
        let c = select_centered(&wrap(&cols), n).unwrap();
        let mean: Vec<f64> = (0..n).map(|i| cols.iter().map(|v| v[i]).sum::<f64>() / r as f64).collect();
        prop_assert!(ops::max_abs_diff(&c.v, &mean) <= 1e-12);
        let rv = select_random_vertex(&wrap(&cols), n, seed).unwrap();
        prop_assert!(cols.contains(&rv.v));
        prop_assert_eq!(&rv, &select_random_vertex(&wrap(&cols), n, seed).unwrap());
    }
}

#[test]
fn combinations_lie_in_the_hull_for_larger_sets() {
    for seed in 0..100u64 {
        let (n, r) = (30, 4 + (seed as usize) % 20);
        let cols = columns(seed, n, r);
        let g = random_point(seed + 1, n, 0.3);
        let d = draw_sketch(12, n, SketchKind::GaussianRows, seed).unwrap();
        let dec = select_ra(&wrap(&cols), &g, &d, f64::INFINITY, &LpConfig::default()).unwrap();
        assert!(dec.lp_called);
        let Branch::Combination(w) = &dec.branch else { panic!("expected a combination") };
        assert!(w[0].iter().all(|a| *a >= -1e-12) && (w[0].iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        assert!(hull_distance(&cols, &dec.v).unwrap() <= 1e-8, "seed {seed}");
    }
}

#[test]
fn greedy_full_beats_random_aggregates_on_topk() {
    let n = 40;
    for seed in 0..100u64 {
        let x = synthetic_sparse(60, n, 6, seed).unwrap();
        let p = build_topk_model(&x, 5).unwrap();
        let w = vec![0.0; n];
        let g = p.grad_g(&w).unwrap();
        let active = p.active_set(&w, 0.0).unwrap();
        let grads = p.active_gradients(&w, &active).unwrap();
        let geo = Geometry { grad_g: &g, x: &w, bounds: None };
        let greedy = select_block_aggregate(&grads, &geo, AggregateMode::GreedyFull).unwrap();
        let gnorm = ops::norm2(&ops::sub(&g, &greedy.v));
        let random_mean = (0..10u64)
            .map(|s| {
                let v = select_block_aggregate(&grads, &geo, AggregateMode::Random(seed * 10 + s)).unwrap().v;
                ops::norm2(&ops::sub(&g, &v))
            })
            .sum::<f64>()
            / 10.0;
        assert!(gnorm >= random_mean, "seed {seed}: greedy {gnorm} < random mean {random_mean}");
    }
}
