use rand::seq::index::sample;
use rand::Rng;

use super::split::DcSplit;
use crate::error::{check_dim, Error, Result};
use crate::model::{BlockKind, Bounds, ConvexPart, DcProgram, MaxBlock, SmoothPiece};
use crate::numerics::{ops, SparseMatrixCSR};
use crate::rng;

/// `½‖w‖² − max_i {a_iᵀw, −a_iᵀw}`.
pub fn build_support_model(x: &SparseMatrixCSR) -> Result<DcProgram> {
    let block = MaxBlock::new(
        BlockKind::SparseAffine { rows: x.clone(), offsets: vec![0.0; x.n_rows()], signed: true },
        1.0,
    )?;
    DcProgram::new(ConvexPart::scaled_identity(x.n_cols(), 1.0)?, vec![block], None, 0.0)
}

/// `½‖w‖² − Σ_{j≤k} |Xw|_(j)`.
pub fn build_topk_model(x: &SparseMatrixCSR, k: usize) -> Result<DcProgram> {
    let block = MaxBlock::new(BlockKind::TopK { x: x.clone(), k }, 1.0)?;
    DcProgram::new(ConvexPart::scaled_identity(x.n_cols(), 1.0)?, vec![block], None, 0.0)
}

/// `(1/2N)‖Xw − y‖² + (λ/2)‖w‖² − max_{|S|=q} (1/2N) Σ_{i∈S} (a_iᵀw − y_i)²`.
pub fn build_trimmed_model(x: &SparseMatrixCSR, y: &[f64], q: usize, lambda: f64) -> Result<DcProgram> {
    check_dim(x.n_rows(), y.len())?;
    let nn = x.n_rows() as f64;
    let g = ConvexPart::ridge(x.clone(), y.to_vec(), lambda, 1.0 / nn)?;
    let block = MaxBlock::new(BlockKind::Trimmed { x: x.clone(), y: y.to_vec(), q }, 1.0 / nn)?;
    DcProgram::new(g, vec![block], None, 0.0)
}

/// `xᵀQ₊x − xᵀQ₋x − ρ Σ max{x_i − ½, ½ − x_i} + ρn/2` on `[0,1]ⁿ`, which equals
/// `xᵀQx + ρ Σ min{x_i, 1 − x_i}` there. The original `Q` is attached for rounding.
pub fn build_qubo_penalty(split: &DcSplit, rho: f64) -> Result<DcProgram> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput(format!("penalty weight must be positive, got {rho}")));
    }
    let n = split.plus.n();
    check_dim(n, split.minus.n())?;
    let g = ConvexPart::general_quad(split.plus.scaled(2.0), vec![0.0; n], 0.0)?;
    let mut blocks = Vec::with_capacity(n + 1);
    let concave = match split.gamma {
        Some(gamma) => SmoothPiece::affine_plus_quad(vec![0.0; n], 2.0 * gamma)?,
        None => SmoothPiece::quadratic(split.minus.scaled(2.0)),
    };
    if split.minus.max_abs() > 0.0 {
        blocks.push(MaxBlock::new(BlockKind::Pieces(vec![concave]), 1.0)?);
    }
    for i in 0..n {
        let rows = SparseMatrixCSR::from_rows(n, &[vec![(i, 1.0)]])?;
        blocks.push(MaxBlock::new(BlockKind::SparseAffine { rows, offsets: vec![-0.5], signed: true }, rho)?);
    }
    DcProgram::new(g, blocks, Some(Bounds::unit(n)), rho * n as f64 / 2.0)?.with_qubo(split.q.clone())
}

#[derive(Clone, Debug)]
pub struct LcpInstance {
    pub program: DcProgram,
    /// Row-stochastic `M ≥ 0`.
    pub m: SparseMatrixCSR,
    pub c: Vec<f64>,
    pub rho: f64,
}

/// `½‖x − c‖² + ρ Σ min{x_i, (Mx)_i}` on `[0,1]ⁿ` with `c = ½·1`, `ρ = 1`, written as
/// `g(x) − ρ Σ max{x_i, (Mx)_i}` with `g = ½‖x − c‖² + ρ (1 + Mᵀ1)ᵀx`.
pub fn gen_lcp(n: usize, nnz_per_row: usize, seed: u64) -> Result<LcpInstance> {
    if n == 0 || nnz_per_row == 0 || nnz_per_row > n {
        return Err(Error::InvalidInput(format!("need 1 <= nnz_per_row <= n, got {nnz_per_row} with n = {n}")));
    }
    let mut r = rng::stream(seed, &[0x1c9]);
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|_| {
            let mut cols = sample(&mut r, n, nnz_per_row).into_vec();
            cols.sort_unstable();
            let w: Vec<f64> = (0..nnz_per_row).map(|_| 1.0 - r.random::<f64>()).collect();
            let s: f64 = w.iter().sum();
            cols.into_iter().zip(w).map(|(c, v)| (c, v / s)).collect()
        })
        .collect();
    lcp_from_matrix(SparseMatrixCSR::from_rows(n, &rows)?)
}

/// The LCP penalty program for a given square row-stochastic `M`.
pub fn lcp_from_matrix(m: SparseMatrixCSR) -> Result<LcpInstance> {
    let n = m.n_rows();
    check_dim(n, m.n_cols())?;
    let rho = 1.0;
    let c = vec![0.5; n];
    let colsum = m.matvec_t(&vec![1.0; n]);
    let linear: Vec<f64> = (0..n).map(|i| -c[i] + rho * (1.0 + colsum[i])).collect();
    let g = ConvexPart::scaled_identity(n, 1.0)?.with_linear(linear, 0.5 * ops::norm2_sq(&c))?;
    let blocks = (0..n)
        .map(|i| {
            let (idx, val) = m.row(i);
            let mi: Vec<(usize, f64)> = idx.iter().copied().zip(val.iter().copied()).collect();
            let rows = SparseMatrixCSR::from_rows(n, &[vec![(i, 1.0)], mi])?;
            MaxBlock::new(BlockKind::SparseAffine { rows, offsets: vec![0.0, 0.0], signed: false }, rho)
        })
        .collect::<Result<Vec<_>>>()?;
    let program = DcProgram::new(g, blocks, Some(Bounds::unit(n)), 0.0)?;
    Ok(LcpInstance { program, m, c, rho })
}

/// `(n⁻¹ Σ min{x_i, (Mx)_i}, n⁻¹ Σ |x_i (Mx)_i|)`.
pub fn lcp_gaps(m: &SparseMatrixCSR, x: &[f64]) -> (f64, f64) {
    let y = m.matvec(x);
    let n = x.len() as f64;
    let min_gap = x.iter().zip(&y).map(|(a, b)| a.min(*b)).sum::<f64>() / n;
    let prod_gap = x.iter().zip(&y).map(|(a, b)| (a * b).abs()).sum::<f64>() / n;
    (min_gap, prod_gap)
}
