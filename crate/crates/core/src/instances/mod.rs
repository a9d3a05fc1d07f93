//! Instance generators, file parsers, DC splits and model builders.

mod builders;
mod format;
mod libsvm;
mod orlib;
mod split;

pub use builders::{
    build_qubo_penalty, build_support_model, build_topk_model, build_trimmed_model, gen_lcp, lcp_from_matrix,
    lcp_gaps, LcpInstance,
};
pub use format::{InstanceFile, StoredMatrix, FORMAT_VERSION};
pub use libsvm::{known_dimension, parse_libsvm, synthetic_sparse, write_libsvm, SparseDataset};
pub use orlib::{parse_orlib_qubo, parse_orlib_qubo_with, random_qubo, write_orlib_qubo, OrlibConvention, QuboInstance};
pub use split::{dc_split_shift, dc_split_spectral, DcSplit};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{BlockKind, ConvexPart, DcProgram, MaxBlock, SmoothPiece};
use crate::numerics::ops;
use crate::rng;

/// Rows `a_i = 2√U_i · u_i` with `u_i` uniform on the sphere; the signed
/// mirror `a_{p+i} = −a_i` follows.
pub fn signed_pair_rows(n: usize, p: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidInput(format!("signed pairs need n, p >= 1, got ({n}, {p})")));
    }
    let mut r = rng::stream(seed, &[0x5167_4e50]);
    let mut rows = Vec::with_capacity(2 * p);
    for _ in 0..p {
        let mut u: Vec<f64> = (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        let nu = ops::norm2(&u);
        let radius = 2.0 * (1.0 - r.random::<f64>()).sqrt();
        u.iter_mut().for_each(|v| *v *= radius / nu);
        rows.push(u);
    }
    for i in 0..p {
        rows.push(rows[i].iter().map(|v| -v).collect());
    }
    Ok(rows)
}

/// `½‖x‖² − max_i a_iᵀx` over signed pairs.
pub fn gen_signed_pair_affine(n: usize, p: usize, seed: u64) -> Result<DcProgram> {
    let pieces = signed_pair_rows(n, p, seed)?
        .into_iter()
        .map(|a| SmoothPiece::affine(a, 0.0))
        .collect::<Result<Vec<_>>>()?;
    DcProgram::new(ConvexPart::scaled_identity(n, 1.0)?, vec![MaxBlock::new(BlockKind::Pieces(pieces), 1.0)?], None, 0.0)
}

/// `½‖x‖² − max_i {a_iᵀx + (γ/2)‖x‖²}` over signed pairs, `0 ≤ γ < 1`.
pub fn gen_signed_pair_quadratic(n: usize, p: usize, gamma: f64, seed: u64) -> Result<DcProgram> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidInput(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    let pieces = signed_pair_rows(n, p, seed)?
        .into_iter()
        .map(|a| SmoothPiece::affine_plus_quad(a, gamma))
        .collect::<Result<Vec<_>>>()?;
    DcProgram::new(ConvexPart::scaled_identity(n, 1.0)?, vec![MaxBlock::new(BlockKind::Pieces(pieces), 1.0)?], None, 0.0)
}

/// `½x² − max{x, −x}`.
pub fn one_d_trap() -> DcProgram {
    let pieces = vec![SmoothPiece::Affine { a: vec![1.0], b: 0.0 }, SmoothPiece::Affine { a: vec![-1.0], b: 0.0 }];
    DcProgram::new(
        ConvexPart::scaled_identity(1, 1.0).expect("unit scaling"),
        vec![MaxBlock::new(BlockKind::Pieces(pieces), 1.0).expect("two pieces")],
        None,
        0.0,
    )
    .expect("valid program")
}

pub const NEAR_ACTIVE_SLOPES: [f64; 3] = [0.010, 0.015, 0.020];
pub const NEAR_ACTIVE_DELTA: f64 = 3e-4;

/// `½x² − max{0, c₁x − δ, c₂x − δ, c₃x − δ}`.
pub fn near_active_diagnostic() -> DcProgram {
    let mut pieces = vec![SmoothPiece::Affine { a: vec![0.0], b: 0.0 }];
    pieces.extend(NEAR_ACTIVE_SLOPES.iter().map(|c| SmoothPiece::Affine { a: vec![*c], b: -NEAR_ACTIVE_DELTA }));
    DcProgram::new(
        ConvexPart::scaled_identity(1, 1.0).expect("unit scaling"),
        vec![MaxBlock::new(BlockKind::Pieces(pieces), 1.0).expect("four pieces")],
        None,
        0.0,
    )
    .expect("valid program")
}

/// First start `½·1`, the rest independent uniform points in the unit box.
pub fn qubo_starts(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|s| {
            if s == 0 {
                vec![0.5; n]
            } else {
                let mut r = rng::stream(seed, &[0x57a7, s as u64]);
                (0..n).map(|_| r.random::<f64>()).collect()
            }
        })
        .collect()
}
