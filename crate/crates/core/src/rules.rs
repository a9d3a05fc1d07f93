//! Active-gradient selection: centered, random vertex, full vertex, the
//! safeguarded sampled rule, and their aggregate versions for block sums.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::lp::{solve_block_chebyshev, Backend, LpConfig};
use crate::model::{BlockGradients, Bounds, Column};
use crate::numerics::{ops, DenseMatrix};
use crate::rng;
use crate::sketch::SketchMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Branch {
    /// Chosen ids per block (piece index, or element indices for subset blocks).
    Vertex(Vec<Vec<usize>>),
    /// Weights per block over that block's candidates, each summing to one.
    Combination(Vec<Vec<f64>>),
}

impl Branch {
    pub fn is_vertex(&self) -> bool {
        matches!(self, Branch::Vertex(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpInfo {
    pub backend: Backend,
    pub t: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionDecision {
    /// The linearization vector, block weights included.
    pub v: Vec<f64>,
    pub branch: Branch,
    pub r_hat: Option<f64>,
    pub lp_called: bool,
    pub lp: Option<LpInfo>,
}

/// Where residuals are measured: `∇g(x)` and, for boxed programs, the bound
/// faces active at `x`.
#[derive(Clone, Copy, Debug)]
pub struct Geometry<'a> {
    pub grad_g: &'a [f64],
    pub x: &'a [f64],
    pub bounds: Option<&'a Bounds>,
}

impl<'a> Geometry<'a> {
    pub fn free(grad_g: &'a [f64]) -> Self {
        Self { grad_g, x: grad_g, bounds: None }
    }

    #[inline]
    fn face(&self, i: usize, w: f64) -> f64 {
        match self.bounds {
            Some(b) => b.face(i, self.x[i], w),
            None => w,
        }
    }

    fn face_all(&self, w: &mut [f64]) {
        if self.bounds.is_some() {
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = self.face(i, *wi);
            }
        }
    }

    /// `π(∇g − v)`
    pub fn mismatch(&self, v: &[f64]) -> Vec<f64> {
        let mut w = ops::sub(self.grad_g, v);
        self.face_all(&mut w);
        w
    }

    fn n(&self) -> usize {
        self.grad_g.len()
    }
}

fn as_block<'a>(cols: &[Column<'a>]) -> BlockGradients<'a> {
    BlockGradients {
        weight: 1.0,
        fixed: None,
        fixed_ids: Vec::new(),
        candidates: cols
            .iter()
            .enumerate()
            .map(|(id, col)| crate::model::Candidate { id, col: col.clone() })
            .collect(),
        needed: 1,
    }
}

fn check_block(b: &BlockGradients<'_>) -> Result<()> {
    if b.candidates.is_empty() && b.needed > 0 {
        return Err(Error::InvalidInput("block has no active gradients".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Single-block rules

/// Mean of the active columns.
pub fn select_centered(cols: &[Column<'_>], n: usize) -> Result<SelectionDecision> {
    centered_single(&as_block(cols), n)
}

pub(crate) fn centered_single(b: &BlockGradients<'_>, n: usize) -> Result<SelectionDecision> {
    check_block(b)?;
    let r = b.candidates.len();
    let mut v = vec![0.0; n];
    for c in &b.candidates {
        c.col.add_to(b.weight / r as f64, &mut v);
    }
    Ok(SelectionDecision {
        v,
        branch: Branch::Combination(vec![vec![1.0 / r as f64; r]]),
        r_hat: None,
        lp_called: false,
        lp: None,
    })
}

/// A uniformly chosen active column, reproducible from `seed`.
pub fn select_random_vertex(cols: &[Column<'_>], n: usize, seed: u64) -> Result<SelectionDecision> {
    random_single(&as_block(cols), n, seed)
}

pub(crate) fn random_single(b: &BlockGradients<'_>, n: usize, seed: u64) -> Result<SelectionDecision> {
    check_block(b)?;
    let i = rng::stream(seed, &[]).random_range(0..b.candidates.len());
    Ok(vertex_decision(b, i, n, None))
}

fn vertex_decision(b: &BlockGradients<'_>, i: usize, n: usize, r_hat: Option<f64>) -> SelectionDecision {
    let mut v = vec![0.0; n];
    b.candidates[i].col.add_to(b.weight, &mut v);
    SelectionDecision {
        v,
        branch: Branch::Vertex(vec![vec![b.candidates[i].id]]),
        r_hat,
        lp_called: false,
        lp: None,
    }
}

/// The column with the largest `‖G_i − g‖`, smallest index on ties.
pub fn select_full_vertex(cols: &[Column<'_>], g: &[f64]) -> Result<SelectionDecision> {
    full_single(&as_block(cols), &Geometry::free(g))
}

pub(crate) fn full_single(b: &BlockGradients<'_>, geo: &Geometry<'_>) -> Result<SelectionDecision> {
    check_block(b)?;
    let mut best = (f64::NEG_INFINITY, 0);
    let mut w = vec![0.0; geo.n()];
    for (i, c) in b.candidates.iter().enumerate() {
        w.copy_from_slice(geo.grad_g);
        c.col.add_to(-b.weight, &mut w);
        geo.face_all(&mut w);
        let r = ops::norm2(&w);
        if r > best.0 {
            best = (r, i);
        }
    }
    Ok(vertex_decision(b, best.1, geo.n(), Some(best.0)))
}

/// Sampled residual of every candidate: `‖D π(∇g − w c_i)‖`.
pub(crate) fn sketched_scores(b: &BlockGradients<'_>, geo: &Geometry<'_>, d: &SketchMatrix) -> Vec<f64> {
    let n = geo.n();
    if geo.bounds.is_none() {
        let dg = d.apply(geo.grad_g);
        b.candidates
            .iter()
            .map(|c| match &c.col {
                Column::Row { .. } => {
                    let mut z = dg.clone();
                    d.apply_column_into(&c.col, -b.weight, &mut z);
                    ops::norm2(&z)
                }
                _ => {
                    let mut w = geo.grad_g.to_vec();
                    c.col.add_to(-b.weight, &mut w);
                    ops::norm2(&d.apply(&w))
                }
            })
            .collect()
    } else {
        let mut w = vec![0.0; n];
        b.candidates
            .iter()
            .map(|c| {
                w.copy_from_slice(geo.grad_g);
                c.col.add_to(-b.weight, &mut w);
                geo.face_all(&mut w);
                ops::norm2(&d.apply(&w))
            })
            .collect()
    }
}

/// The safeguarded rule: the most violating sketched vertex when the sampled
/// residual exceeds `tau`, else the Chebyshev LP combination.
pub fn select_ra(
    cols: &[Column<'_>],
    g: &[f64],
    d: &SketchMatrix,
    tau: f64,
    lp: &LpConfig,
) -> Result<SelectionDecision> {
    ra_single(&as_block(cols), &Geometry::free(g), d, tau, lp)
}

pub(crate) fn ra_single(
    b: &BlockGradients<'_>,
    geo: &Geometry<'_>,
    d: &SketchMatrix,
    tau: f64,
    lp: &LpConfig,
) -> Result<SelectionDecision> {
    check_block(b)?;
    check_dim(d.n(), geo.n())?;
    if !(tau >= 0.0) {
        return Err(Error::InvalidInput(format!("safeguard tolerance must be >= 0, got {tau}")));
    }
    let scores = sketched_scores(b, geo, d);
    let (mut r_hat, mut arg) = (f64::NEG_INFINITY, 0);
    for (i, s) in scores.iter().enumerate() {
        if *s > r_hat {
            r_hat = *s;
            arg = i;
        }
    }
    if r_hat > tau {
        return Ok(vertex_decision(b, arg, geo.n(), Some(r_hat)));
    }
    let r = b.candidates.len();
    if r == 1 {
        let mut dec = vertex_decision(b, 0, geo.n(), Some(r_hat));
        dec.branch = Branch::Combination(vec![vec![1.0]]);
        return Ok(dec);
    }
    let cols: Vec<Vec<f64>> = b
        .candidates
        .iter()
        .map(|c| {
            let mut out = vec![0.0; d.m()];
            d.apply_column_into(&c.col, b.weight, &mut out);
            out
        })
        .collect();
    let a = DenseMatrix::from_columns(d.m(), &cols)?;
    let sol = solve_block_chebyshev(&a, &d.apply(geo.grad_g), &[r], lp)?;
    let mut v = vec![0.0; geo.n()];
    for (c, al) in b.candidates.iter().zip(&sol.alpha) {
        if *al != 0.0 {
            c.col.add_to(b.weight * al, &mut v);
        }
    }
    Ok(SelectionDecision {
        v,
        branch: Branch::Combination(vec![sol.alpha]),
        r_hat: Some(r_hat),
        lp_called: true,
        lp: Some(LpInfo { backend: sol.backend, t: sol.t, iterations: sol.iterations }),
    })
}

// ---------------------------------------------------------------------------
// Aggregate rules for block sums

#[derive(Clone, Copy, Debug)]
pub enum AggregateMode<'a> {
    Centered,
    Random(u64),
    GreedyFull,
    GreedySketched(&'a SketchMatrix),
}

/// Candidate ranges sharing one element id (both signs of a subset element).
fn elements(b: &BlockGradients<'_>) -> Vec<std::ops::Range<usize>> {
    let mut out: Vec<std::ops::Range<usize>> = Vec::new();
    for (i, c) in b.candidates.iter().enumerate() {
        match out.last_mut() {
            Some(r) if b.candidates[r.start].id == c.id => r.end = i + 1,
            _ => out.push(i..i + 1),
        }
    }
    out
}

fn centered_block(b: &BlockGradients<'_>, v: &mut [f64]) -> Vec<f64> {
    b.add_fixed(v);
    if b.needed == 0 {
        return Vec::new();
    }
    let els = elements(b);
    let per_elem = b.needed as f64 / els.len() as f64;
    let mut alpha = vec![0.0; b.candidates.len()];
    for r in els {
        let share = 1.0 / r.len() as f64;
        for c in r {
            b.candidates[c].col.add_to(b.weight * per_elem * share, v);
            alpha[c] = per_elem * share / b.needed as f64;
        }
    }
    alpha
}

/// Aggregate vertex or centroid according to `mode`.
pub fn select_block_aggregate(
    blocks: &[BlockGradients<'_>],
    geo: &Geometry<'_>,
    mode: AggregateMode<'_>,
) -> Result<SelectionDecision> {
    for b in blocks {
        check_block(b)?;
    }
    let n = geo.n();
    match mode {
        AggregateMode::Centered => {
            let mut v = vec![0.0; n];
            let alphas = blocks.iter().map(|b| centered_block(b, &mut v)).collect();
            Ok(SelectionDecision { v, branch: Branch::Combination(alphas), r_hat: None, lp_called: false, lp: None })
        }
        AggregateMode::Random(seed) => {
            let mut v = vec![0.0; n];
            let mut ids = Vec::with_capacity(blocks.len());
            for (l, b) in blocks.iter().enumerate() {
                let mut rng = rng::stream(seed, &[l as u64]);
                let els = elements(b);
                let picks: Vec<usize> = if b.needed == 1 && b.fixed.is_none() {
                    vec![rng.random_range(0..b.candidates.len())]
                } else {
                    if els.len() < b.needed {
                        return Err(Error::InvalidInput("subset block has fewer elements than needed".into()));
                    }
                    let mut chosen: Vec<usize> = sample(&mut rng, els.len(), b.needed).into_vec();
                    chosen.sort_unstable();
                    chosen
                        .into_iter()
                        .map(|e| {
                            let r = els[e].clone();
                            r.start + rng.random_range(0..r.len())
                        })
                        .collect()
                };
                b.add_choice(&picks, &mut v);
                let mut block_ids = b.fixed_ids.clone();
                block_ids.extend(picks.iter().map(|&c| b.candidates[c].id));
                ids.push(block_ids);
            }
            Ok(SelectionDecision { v, branch: Branch::Vertex(ids), r_hat: None, lp_called: false, lp: None })
        }
        AggregateMode::GreedyFull => Ok(greedy(blocks, geo, None).into_decision()),
        AggregateMode::GreedySketched(d) => {
            check_dim(d.n(), n)?;
            Ok(greedy(blocks, geo, Some(d)).into_decision())
        }
    }
}

pub(crate) struct GreedyOutcome {
    pub v: Vec<f64>,
    pub ids: Vec<Vec<usize>>,
    /// `‖π(∇g − v)‖`, or `‖D π(∇g − v)‖` when sketched.
    pub score: f64,
}

impl GreedyOutcome {
    fn into_decision(self) -> SelectionDecision {
        SelectionDecision {
            v: self.v,
            branch: Branch::Vertex(self.ids),
            r_hat: Some(self.score),
            lp_called: false,
            lp: None,
        }
    }
}

/// Greedy aggregate: start from the determined contributions, then visit the
/// remaining blocks in order and pick, one element at a time, the candidate
/// maximizing the (sketched) projected residual `π(∇g − v)` of the running sum.
pub(crate) fn greedy(blocks: &[BlockGradients<'_>], geo: &Geometry<'_>, d: Option<&SketchMatrix>) -> GreedyOutcome {
    let n = geo.n();
    let mut v = vec![0.0; n];
    let mut ids: Vec<Vec<usize>> = blocks.iter().map(|b| b.fixed_ids.clone()).collect();
    let mut open = Vec::new();
    for (l, b) in blocks.iter().enumerate() {
        if b.is_determined() {
            let all: Vec<usize> = (0..b.needed.min(b.candidates.len())).collect();
            b.add_choice(&all, &mut v);
            ids[l].extend(all.iter().map(|&c| b.candidates[c].id));
        } else {
            b.add_fixed(&mut v);
            open.push(l);
        }
    }
    let mut z = ops::sub(geo.grad_g, &v);
    let mut p: Vec<f64> = z.iter().enumerate().map(|(i, zi)| geo.face(i, *zi)).collect();
    let mut p_sq = ops::norm2_sq(&p);
    let mut sp = d.map(|dm| dm.apply(&p));
    let mut delta: Vec<(usize, f64, f64)> = Vec::new();
    let mut trial = vec![0.0; d.map_or(0, |dm| dm.m())];

    for l in open {
        let b = &blocks[l];
        let mut used: Vec<bool> = vec![false; b.candidates.len()];
        for _slot in 0..b.needed {
            let mut best: Option<(f64, usize)> = None;
            for (c, cand) in b.candidates.iter().enumerate() {
                if used[c] {
                    continue;
                }
                delta.clear();
                cand.col.for_each(|j, cj| {
                    let znew = z[j] - b.weight * cj;
                    delta.push((j, geo.face(j, znew), znew));
                });
                let score = match (&sp, d) {
                    (Some(spv), Some(dm)) => {
                        trial.copy_from_slice(spv);
                        for &(j, pnew, _) in &delta {
                            let dj = pnew - p[j];
                            if dj != 0.0 {
                                dm.add_unit(j, dj, &mut trial);
                            }
                        }
                        ops::norm2_sq(&trial)
                    }
                    _ => p_sq + delta.iter().map(|&(j, pnew, _)| pnew * pnew - p[j] * p[j]).sum::<f64>(),
                };
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, c));
                }
            }
            let Some((_, c)) = best else { break };
            let cand = &b.candidates[c];
            cand.col.for_each(|j, cj| {
                z[j] -= b.weight * cj;
                let pnew = geo.face(j, z[j]);
                if let (Some(spv), Some(dm)) = (sp.as_mut(), d) {
                    let dj = pnew - p[j];
                    if dj != 0.0 {
                        dm.add_unit(j, dj, spv);
                    }
                }
                p_sq += pnew * pnew - p[j] * p[j];
                p[j] = pnew;
            });
            cand.col.add_to(b.weight, &mut v);
            for (k, other) in b.candidates.iter().enumerate() {
                if other.id == cand.id {
                    used[k] = true;
                }
            }
            ids[l].push(cand.id);
        }
    }
    let w = geo.mismatch(&v);
    let score = match d {
        Some(dm) => ops::norm2(&dm.apply(&w)),
        None => ops::norm2(&w),
    };
    GreedyOutcome { v, ids, score }
}

/// Block version of the safeguarded rule: the sketched greedy aggregate when its
/// sampled residual exceeds `tau`, else the Chebyshev LP over the product of the
/// simplices of the multi-active explicit blocks. Subset blocks enter the LP
/// branch through their centroid.
pub fn select_block_ra(
    blocks: &[BlockGradients<'_>],
    geo: &Geometry<'_>,
    d: &SketchMatrix,
    tau: f64,
    lp: &LpConfig,
) -> Result<SelectionDecision> {
    for b in blocks {
        check_block(b)?;
    }
    check_dim(d.n(), geo.n())?;
    if !(tau >= 0.0) {
        return Err(Error::InvalidInput(format!("safeguard tolerance must be >= 0, got {tau}")));
    }
    let gr = greedy(blocks, geo, Some(d));
    if gr.score > tau {
        return Ok(gr.into_decision());
    }
    let n = geo.n();
    let mut base = vec![0.0; n];
    let mut alphas: Vec<Vec<f64>> = Vec::with_capacity(blocks.len());
    let mut groups = Vec::new();
    let mut lp_blocks = Vec::new();
    for (l, b) in blocks.iter().enumerate() {
        if b.is_determined() {
            let all: Vec<usize> = (0..b.needed.min(b.candidates.len())).collect();
            b.add_choice(&all, &mut base);
            alphas.push(vec![1.0; all.len()]);
        } else if b.is_explicit() {
            groups.push(b.candidates.len());
            lp_blocks.push(l);
            alphas.push(Vec::new());
        } else {
            alphas.push(centered_block(b, &mut base));
        }
    }
    if groups.is_empty() {
        return Ok(SelectionDecision {
            v: base,
            branch: Branch::Combination(alphas),
            r_hat: Some(gr.score),
            lp_called: false,
            lp: None,
        });
    }
    let mut cols = Vec::new();
    for &l in &lp_blocks {
        let b = &blocks[l];
        for c in &b.candidates {
            let mut out = vec![0.0; d.m()];
            d.apply_column_into(&c.col, b.weight, &mut out);
            cols.push(out);
        }
    }
    let a = DenseMatrix::from_columns(d.m(), &cols)?;
    let rhs = d.apply(&ops::sub(geo.grad_g, &base));
    let sol = solve_block_chebyshev(&a, &rhs, &groups, lp)?;
    let mut v = base;
    let mut k = 0;
    for &l in &lp_blocks {
        let b = &blocks[l];
        let al = sol.alpha[k..k + b.candidates.len()].to_vec();
        for (c, w) in b.candidates.iter().zip(&al) {
            if *w != 0.0 {
                c.col.add_to(b.weight * w, &mut v);
            }
        }
        k += b.candidates.len();
        alphas[l] = al;
    }
    Ok(SelectionDecision {
        v,
        branch: Branch::Combination(alphas),
        r_hat: Some(gr.score),
        lp_called: true,
        lp: Some(LpInfo { backend: sol.backend, t: sol.t, iterations: sol.iterations }),
    })
}
