mod common;

use common::{build, random_point, random_raw, raw_piece_gradient, RawG, RawPiece, RawProgram};
use proptest::prelude::*;
use radca::model::BlockActive;
use radca::oracles::{oracle_best_aggregate, AggregateBlock};
use radca::stationarity::{block_residual, criticality_distance, directional_residual, EXACT_TIE_TOL};

/// Affine pieces that all tie at `x`, so the whole block is active there.
fn tied_affine(seed: u64, n: usize, r: usize, x: &[f64]) -> RawProgram {
    let rows: Vec<Vec<f64>> = (0..r).map(|i| random_point(seed.wrapping_mul(31).wrapping_add(i as u64), n, 2.0)).collect();
    let pieces = rows
        .into_iter()
        .map(|a| {
            let b = -a.iter().zip(x).map(|(u, v)| u * v).sum::<f64>();
            RawPiece::Affine(a, b)
        })
        .collect();
    RawProgram { n, g: RawG::Scaled(1.0), linear: vec![0.0; n], blocks: vec![(1.0, pieces)] }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn criticality_distance_is_below_residual(seed in any::<u64>(), n in 1usize..6, r in 1usize..7, tied in any::<bool>()) {
        let x = random_point(seed, n, 1.0);
        let raw = if tied {
            tied_affine(seed, n, r, &x)
        } else {
            let mut raw = random_raw(seed, 6);
            raw.blocks.truncate(1);
            raw
        };
        let x = if tied { x } else { random_point(seed, raw.n, 1.0) };
        let p = build(&raw);
        let dist = criticality_distance(&p, &x).unwrap();
        let rd = directional_residual(&p, &x, EXACT_TIE_TOL).unwrap().r_d;
        prop_assert!(dist <= rd + 1e-9, "dist {dist} > r_d {rd}");
    }
}

#[test]
fn residual_vanishes_exactly_when_gradients_match() {
    for seed in 0..200u64 {
        let n = 1 + (seed as usize) % 5;
        let x = random_point(seed, n, 1.0);
        // g = ½‖x‖² + 0.25, so ∇g(x) = x; every piece has gradient x.
        let b = -x.iter().map(|v| v * v).sum::<f64>();
        let same: Vec<RawPiece> = (0..3).map(|_| RawPiece::Affine(x.clone(), b)).collect();
        let mut raw = RawProgram { n, g: RawG::Scaled(1.0), linear: vec![0.0; n], blocks: vec![(1.0, same)] };
        assert_eq!(directional_residual(&build(&raw), &x, 0.0).unwrap().r_d, 0.0);

        let mut d = random_point(seed ^ 0x55, n, 1.0);
        let len = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let target = 1e-6 * (1.0 + (seed % 7) as f64);
        d.iter_mut().for_each(|v| *v *= target / len);
        let a: Vec<f64> = x.iter().zip(&d).map(|(u, v)| u + v).collect();
        let b2 = b - d.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>();
        raw.blocks[0].1.push(RawPiece::Affine(a, b2));
        let rd = directional_residual(&build(&raw), &x, 1e-12).unwrap().r_d;
        assert!(rd > 0.0 && (rd - target).abs() <= 1e-9, "seed {seed}: {rd} vs {target}");
    }
}

#[test]
fn block_residual_matches_nested_enumeration() {
    let mut checked = 0;
    for seed in 0..300u64 {
        let raw = random_raw(seed, 5);
        let p = build(&raw);
        let x = random_point(seed + 1, raw.n, 0.7);
        let eps = 0.5 + (seed % 4) as f64;
        let active = p.active_set(&x, eps).unwrap();
        if active.aggregate_count() > 10_000 {
            continue;
        }
        let blocks: Vec<AggregateBlock> = raw
            .blocks
            .iter()
            .zip(&active.blocks)
            .map(|((w, ps), a)| {
                let BlockActive::Pieces(ids) = a else { unreachable!() };
                AggregateBlock::Explicit(
                    ids.iter().map(|&i| raw_piece_gradient(&ps[i], &x).iter().map(|v| w * v).collect()).collect(),
                )
            })
            .collect();
        let z = p.grad_g(&x).unwrap();
        let (want, _) = oracle_best_aggregate(&blocks, &z, 10_000).unwrap();
        let got = block_residual(&p, &x, eps, 10_000).unwrap().r_d;
        assert!((got - want).abs() <= 1e-10 * (1.0 + want), "seed {seed}: {got} vs {want}");
        if raw.blocks.len() == 1 {
            let single = directional_residual(&p, &x, eps).unwrap().r_d;
            assert!((single - got).abs() <= 1e-12 * (1.0 + got));
        }
        checked += 1;
    }
    assert!(checked >= 200, "only {checked} enumerable cases");
}

#[test]
fn block_residual_refuses_over_cap() {
    let raw = tied_affine(4, 3, 6, &[0.1, 0.2, 0.3]);
    let mut raw2 = raw.clone();
    raw2.blocks.push(raw.blocks[0].clone());
    let p = build(&raw2);
    assert!(block_residual(&p, &[0.1, 0.2, 0.3], 1e-9, 35).is_err());
    assert!(block_residual(&p, &[0.1, 0.2, 0.3], 1e-9, 36).is_ok());
}

#[test]
fn multi_block_programs_need_block_residual() {
    let raw = random_raw(11, 3);
    let mut two = raw.clone();
    two.blocks = vec![raw.blocks[0].clone(), raw.blocks[0].clone()];
    let p = build(&two);
    let x = vec![0.0; raw.n];
    assert!(directional_residual(&p, &x, 0.0).is_err());
    assert!(criticality_distance(&p, &x).is_err());
}
