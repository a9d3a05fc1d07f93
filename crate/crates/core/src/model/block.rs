use serde::{Deserialize, Serialize};

use super::column::{BlockGradients, Candidate, Column};
use super::piece::SmoothPiece;
use crate::error::{check_dim, Error, Result};
use crate::numerics::{ops, SparseMatrixCSR};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum BlockKind {
    /// An explicit list of smooth pieces.
    Pieces(Vec<SmoothPiece>),
    /// Affine pieces `rowᵢ·x + offᵢ`; when `signed`, pieces `N..2N` are the negations.
    SparseAffine { rows: SparseMatrixCSR, offsets: Vec<f64>, signed: bool },
    /// `Σ_{j≤k} |Xx|_(j)`, the max over signed k-subsets of rows.
    TopK { x: SparseMatrixCSR, k: usize },
    /// `Σ_{j≤q} ½ (Xx − y)²_(j)`, the max over q-subsets of squared residuals.
    Trimmed { x: SparseMatrixCSR, y: Vec<f64>, q: usize },
}

/// `weight · max_i ψ_i(x)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaxBlock {
    pub kind: BlockKind,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signs {
    Pos,
    Neg,
    Both,
}

impl Signs {
    pub fn list(self) -> &'static [f64] {
        match self {
            Signs::Pos => &[1.0],
            Signs::Neg => &[-1.0],
            Signs::Both => &[1.0, -1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Elem {
    pub index: usize,
    pub signs: Signs,
}

/// Active description of a subset block: every forced element plus `needed`
/// distinct elements of the pool.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetActive {
    pub forced: Vec<Elem>,
    pub pool: Vec<Elem>,
    pub needed: usize,
    /// Largest gap `h − ψ_S` over subsets `S` of this description.
    pub gap_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BlockActive {
    Pieces(Vec<usize>),
    Subset(SubsetActive),
}

impl BlockActive {
    pub fn len(&self) -> usize {
        match self {
            BlockActive::Pieces(p) => p.len(),
            BlockActive::Subset(s) => s.pool.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of distinct aggregate choices, saturating at `u128::MAX`.
    pub fn choice_count(&self) -> u128 {
        match self {
            BlockActive::Pieces(p) => p.len() as u128,
            BlockActive::Subset(s) => {
                // Coefficient of z^needed in Π (1 + c_i z), c_i = sign multiplicity.
                let mut dp = vec![0u128; s.needed + 1];
                dp[0] = 1;
                for e in &s.pool {
                    let c = e.signs.list().len() as u128;
                    for j in (1..=s.needed).rev() {
                        dp[j] = dp[j].saturating_add(dp[j - 1].saturating_mul(c));
                    }
                }
                dp[s.needed]
            }
        }
    }
}

fn subset_values(kind: &BlockKind, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    match kind {
        BlockKind::TopK { x: a, .. } => {
            let r = a.matvec(x);
            (r.iter().map(|v| v.abs()).collect(), r)
        }
        BlockKind::Trimmed { x: a, y, .. } => {
            let r = ops::sub(&a.matvec(x), y);
            (r.iter().map(|v| 0.5 * v * v).collect(), r)
        }
        _ => unreachable!("subset values requested for an explicit block"),
    }
}

fn top_sum(u: &[f64], k: usize) -> (f64, Vec<usize>) {
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&i, &j| u[j].total_cmp(&u[i]).then(i.cmp(&j)));
    (order[..k].iter().map(|&i| u[i]).sum(), order)
}

impl MaxBlock {
    pub fn new(kind: BlockKind, weight: f64) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidInput(format!("block weight must be positive, got {weight}")));
        }
        match &kind {
            BlockKind::Pieces(p) => {
                if p.is_empty() {
                    return Err(Error::InvalidInput("max block needs at least one piece".into()));
                }
                let n = p[0].dim();
                for piece in p {
                    check_dim(n, piece.dim())?;
                }
            }
            BlockKind::SparseAffine { rows, offsets, .. } => {
                if rows.n_rows() == 0 {
                    return Err(Error::InvalidInput("max block needs at least one piece".into()));
                }
                check_dim(rows.n_rows(), offsets.len())?;
            }
            BlockKind::TopK { x, k } => {
                if *k == 0 || *k > x.n_rows() {
                    return Err(Error::InvalidInput(format!("top-k needs 1 <= k <= N, got k = {k}")));
                }
            }
            BlockKind::Trimmed { x, y, q } => {
                check_dim(x.n_rows(), y.len())?;
                if *q == 0 || *q >= x.n_rows() {
                    return Err(Error::InvalidInput(format!("trimmed block needs 1 <= q < N, got q = {q}")));
                }
            }
        }
        Ok(Self { kind, weight })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            BlockKind::Pieces(p) => p[0].dim(),
            BlockKind::SparseAffine { rows, .. } => rows.n_cols(),
            BlockKind::TopK { x, .. } | BlockKind::Trimmed { x, .. } => x.n_cols(),
        }
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.kind, BlockKind::Pieces(_) | BlockKind::SparseAffine { .. })
    }

    pub fn n_pieces(&self) -> Option<usize> {
        match &self.kind {
            BlockKind::Pieces(p) => Some(p.len()),
            BlockKind::SparseAffine { rows, signed, .. } => {
                Some(if *signed { 2 * rows.n_rows() } else { rows.n_rows() })
            }
            _ => None,
        }
    }

    /// All piece values of an explicit block, in piece order.
    pub fn piece_values(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            BlockKind::Pieces(p) => p.iter().map(|ps| ps.value(x)).collect(),
            BlockKind::SparseAffine { rows, offsets, signed } => {
                let mut v: Vec<f64> =
                    rows.matvec(x).iter().zip(offsets).map(|(r, b)| r + b).collect();
                if *signed {
                    let neg: Vec<f64> = v.iter().map(|t| -t).collect();
                    v.extend(neg);
                }
                v
            }
            _ => panic!("piece values are only defined for explicit blocks"),
        }
    }

    /// Unweighted block value `max_i ψ_i(x)`.
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            BlockKind::TopK { k, .. } | BlockKind::Trimmed { q: k, .. } => {
                let (u, _) = subset_values(&self.kind, x);
                top_sum(&u, *k).0
            }
            _ => self.piece_values(x).into_iter().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn piece_gradient<'a>(&'a self, x: &[f64], id: usize) -> Column<'a> {
        match &self.kind {
            BlockKind::Pieces(p) => p[id].gradient(x),
            BlockKind::SparseAffine { rows, .. } => {
                let nr = rows.n_rows();
                let (row, scale) = if id < nr { (id, 1.0) } else { (id - nr, -1.0) };
                Column::Row { rows, row, scale }
            }
            _ => panic!("piece gradients are only defined for explicit blocks"),
        }
    }

    pub fn active(&self, x: &[f64], eps: f64) -> BlockActive {
        match &self.kind {
            BlockKind::TopK { k, .. } | BlockKind::Trimmed { q: k, .. } => {
                let k = *k;
                let (u, r) = subset_values(&self.kind, x);
                let (h, order) = top_sum(&u, k);
                let t = u[order[k - 1]];
                let topk = matches!(self.kind, BlockKind::TopK { .. });
                let signs = |i: usize| {
                    if !topk {
                        Signs::Pos
                    } else if 2.0 * r[i].abs() <= eps {
                        Signs::Both
                    } else if r[i] > 0.0 {
                        Signs::Pos
                    } else {
                        Signs::Neg
                    }
                };
                let mut forced = Vec::new();
                let mut pool = Vec::new();
                for i in 0..u.len() {
                    if u[i] > t + eps {
                        forced.push(Elem { index: i, signs: signs(i) });
                    } else if (u[i] - t).abs() <= eps {
                        pool.push(Elem { index: i, signs: signs(i) });
                    }
                }
                let needed = k - forced.len();
                let forced_sum: f64 = forced.iter().map(|e| u[e.index]).sum();
                let mut worst: Vec<f64> = pool
                    .iter()
                    .map(|e| if e.signs == Signs::Both { -u[e.index] } else { u[e.index] })
                    .collect();
                worst.sort_by(f64::total_cmp);
                let worst_sum: f64 = worst[..needed].iter().sum();
                let gap_bound = (h - forced_sum - worst_sum).max(0.0);
                BlockActive::Subset(SubsetActive { forced, pool, needed, gap_bound })
            }
            _ => {
                let v = self.piece_values(x);
                let h = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                BlockActive::Pieces((0..v.len()).filter(|&i| h - v[i] <= eps).collect())
            }
        }
    }

    /// Active gradient data. With `recheck`, explicit pieces are verified to
    /// satisfy the gap condition at `x`.
    pub fn gradients<'a>(
        &'a self,
        x: &[f64],
        active: &BlockActive,
        eps: f64,
        recheck: bool,
    ) -> Result<BlockGradients<'a>> {
        match (active, &self.kind) {
            (BlockActive::Pieces(ids), BlockKind::Pieces(_) | BlockKind::SparseAffine { .. }) => {
                if ids.is_empty() {
                    return Err(Error::StaleActiveSet("empty block active set".into()));
                }
                if recheck {
                    let v = self.piece_values(x);
                    let h = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let slack = eps + 1e-12 * (1.0 + h.abs());
                    if let Some(&bad) = ids.iter().find(|&&i| i >= v.len() || h - v[i] > slack) {
                        return Err(Error::StaleActiveSet(format!("piece {bad} is not eps-active")));
                    }
                }
                let candidates = ids
                    .iter()
                    .map(|&id| Candidate { id, col: self.piece_gradient(x, id) })
                    .collect();
                Ok(BlockGradients {
                    weight: self.weight,
                    fixed: None,
                    fixed_ids: Vec::new(),
                    candidates,
                    needed: 1,
                })
            }
            (
                BlockActive::Subset(s),
                BlockKind::TopK { x: a, .. } | BlockKind::Trimmed { x: a, .. },
            ) => {
                let resid: Option<Vec<f64>> = match &self.kind {
                    BlockKind::Trimmed { y, .. } => Some(ops::sub(&a.matvec(x), y)),
                    _ => None,
                };
                let elem_cols = |e: &Elem| -> Vec<Column<'a>> {
                    e.signs
                        .list()
                        .iter()
                        .map(|s| {
                            let scale = match &resid {
                                Some(r) => r[e.index],
                                None => *s,
                            };
                            Column::Row { rows: a, row: e.index, scale }
                        })
                        .collect()
                };
                let fixed = if s.forced.is_empty() {
                    None
                } else {
                    let mut f = vec![0.0; a.n_cols()];
                    for e in &s.forced {
                        elem_cols(e)[0].add_to(1.0, &mut f);
                    }
                    Some(f)
                };
                let candidates = s
                    .pool
                    .iter()
                    .flat_map(|e| {
                        elem_cols(e).into_iter().map(move |col| Candidate { id: e.index, col })
                    })
                    .collect();
                Ok(BlockGradients {
                    weight: self.weight,
                    fixed,
                    fixed_ids: s.forced.iter().map(|e| e.index).collect(),
                    candidates,
                    needed: s.needed,
                })
            }
            _ => Err(Error::StaleActiveSet("active set kind does not match the block".into())),
        }
    }
}
