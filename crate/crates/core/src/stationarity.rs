//! Exact directional-stationarity residuals and the criticality distance.

use crate::error::{Error, Result};
use crate::lp::solve_simplex_least_squares;
use crate::model::{BlockGradients, DcProgram};
use crate::numerics::{ops, DenseMatrix};

pub const DEFAULT_ENUMERATION_CAP: u128 = 100_000;

/// Pieces within this of the block maximum count as exactly active, so that
/// rounding in a cancelled sum does not split a genuine tie.
pub const EXACT_TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub r_d: f64,
    /// Per block, the piece (or element) ids of the worst aggregate vertex.
    pub worst_vertex: Vec<Vec<usize>>,
    pub criticality_dist: Option<f64>,
}

/// `max_i ‖π(∇g − ∇ψ_i)‖` over the `eps`-active pieces of a single-block program.
/// `π` is the identity without a box.
pub fn directional_residual(p: &DcProgram, x: &[f64], eps: f64) -> Result<ResidualReport> {
    if p.blocks().len() != 1 || !p.blocks()[0].is_explicit() {
        return Err(Error::RuleMismatch { rule: "directional_residual", blocks: p.blocks().len() });
    }
    let active = p.active_set(x, eps)?;
    let grads = p.gradients_impl(x, &active, false)?;
    let g = p.grad_g(x)?;
    let (r, i) = vertex_scan(p, x, &g, &grads[0]);
    Ok(ResidualReport {
        r_d: r,
        worst_vertex: vec![vec![grads[0].candidates[i].id]],
        criticality_dist: None,
    })
}

/// Largest projected residual over one block's candidates; smallest index on ties.
pub(crate) fn vertex_scan(p: &DcProgram, x: &[f64], g: &[f64], b: &BlockGradients<'_>) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    let mut w = vec![0.0; g.len()];
    for (i, c) in b.candidates.iter().enumerate() {
        w.copy_from_slice(g);
        c.col.add_to(-b.weight, &mut w);
        p.box_face(x, &mut w);
        let r = ops::norm2(&w);
        if r > best.0 {
            best = (r, i);
        }
    }
    best
}

/// Exact block residual by enumerating every aggregate active vertex.
pub fn block_residual(p: &DcProgram, x: &[f64], eps: f64, cap: u128) -> Result<ResidualReport> {
    let active = p.active_set(x, eps)?;
    let count = active.aggregate_count();
    if count > cap {
        return Err(Error::EnumerationCap { count, cap });
    }
    let grads = p.gradients_impl(x, &active, false)?;
    let g = p.grad_g(x)?;
    let (r, worst) = enumerate_aggregates(p, x, &g, &grads);
    Ok(ResidualReport { r_d: r, worst_vertex: worst, criticality_dist: None })
}

/// Max of `‖π(∇g − v)‖` over aggregates `v`; returns the lexicographically
/// first maximizer in enumeration order, as per-block ids.
pub(crate) fn enumerate_aggregates(
    p: &DcProgram,
    x: &[f64],
    g: &[f64],
    grads: &[BlockGradients<'_>],
) -> (f64, Vec<Vec<usize>>) {
    let mut base = g.to_vec();
    for b in grads {
        if let Some(f) = &b.fixed {
            ops::axpy(-b.weight, f, &mut base);
        }
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut chosen: Vec<Vec<usize>> = vec![Vec::new(); grads.len()];
    let mut scratch = vec![0.0; g.len()];
    walk(p, x, grads, 0, 0, &mut base, &mut chosen, &mut scratch, &mut best);
    let worst = best
        .1
        .iter()
        .zip(grads)
        .map(|(pos, b)| {
            let mut ids: Vec<usize> = b.fixed_ids.clone();
            ids.extend(pos.iter().map(|&c| b.candidates[c].id));
            ids
        })
        .collect();
    (best.0, worst)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    p: &DcProgram,
    x: &[f64],
    grads: &[BlockGradients<'_>],
    block: usize,
    from: usize,
    z: &mut Vec<f64>,
    chosen: &mut Vec<Vec<usize>>,
    scratch: &mut [f64],
    best: &mut (f64, Vec<Vec<usize>>),
) {
    if block == grads.len() {
        scratch.copy_from_slice(z);
        p.box_face(x, scratch);
        let r = ops::norm2(scratch);
        if r > best.0 {
            *best = (r, chosen.clone());
        }
        return;
    }
    let b = &grads[block];
    if chosen[block].len() == b.needed {
        walk(p, x, grads, block + 1, 0, z, chosen, scratch, best);
        return;
    }
    let last_id = chosen[block].last().map(|&c| b.candidates[c].id);
    for c in from..b.candidates.len() {
        let id = b.candidates[c].id;
        if Some(id) == last_id {
            continue;
        }
        b.candidates[c].col.add_to(-b.weight, z);
        chosen[block].push(c);
        walk(p, x, grads, block, c + 1, z, chosen, scratch, best);
        chosen[block].pop();
        b.candidates[c].col.add_to(b.weight, z);
    }
}

/// Distance from `∇g(x)` to the convex hull of the exactly active gradients.
pub fn criticality_distance(p: &DcProgram, x: &[f64]) -> Result<f64> {
    if p.blocks().len() != 1 || !p.blocks()[0].is_explicit() {
        return Err(Error::RuleMismatch { rule: "criticality_distance", blocks: p.blocks().len() });
    }
    let active = p.active_set(x, EXACT_TIE_TOL)?;
    let grads = p.gradients_impl(x, &active, false)?;
    let g = p.grad_g(x)?;
    let b = &grads[0];
    let cols: Vec<Vec<f64>> = b
        .candidates
        .iter()
        .map(|c| ops::scale(b.weight, &c.col.to_dense(g.len())))
        .collect();
    hull_distance(&cols, &g)
}

/// `min_{α∈Δ} ‖Gα − z‖` by projected gradient from the uniform weights.
pub fn hull_distance(cols: &[Vec<f64>], z: &[f64]) -> Result<f64> {
    let a = DenseMatrix::from_columns(z.len(), cols)?;
    let sol = solve_simplex_least_squares(&a, z, 1e-10, 20_000)?;
    Ok(ops::norm2(&ops::sub(&a.matvec(&sol.alpha), z)))
}
