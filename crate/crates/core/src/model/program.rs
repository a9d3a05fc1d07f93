use serde::{Deserialize, Serialize};

use super::block::{BlockActive, MaxBlock};
use super::column::BlockGradients;
use super::convex::ConvexPart;
use crate::error::{check_dim, Error, Result};
use crate::numerics::{ops, DenseSymmetricMatrix};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unit(n: usize) -> Self {
        Self { lower: vec![0.0; n], upper: vec![1.0; n] }
    }

    /// Violation of box stationarity for coordinate `i` of `w = ∇g − v` at `x`.
    #[inline]
    pub fn face(&self, i: usize, xi: f64, wi: f64) -> f64 {
        let at_lo = xi <= self.lower[i];
        let at_hi = xi >= self.upper[i];
        match (at_lo, at_hi) {
            (true, true) => 0.0,
            (true, false) => (-wi).max(0.0),
            (false, true) => wi.max(0.0),
            _ => wi,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| *v >= *l && *v <= *u)
    }
}

/// The binary quadratic `zᵀQz` a penalty program was built from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuboAttachment {
    pub q: DenseSymmetricMatrix,
}

/// `g(x) − Σ_ℓ w_ℓ max_i ψ_ℓi(x) + additive_const`, optionally over a box.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DcProgram {
    g: ConvexPart,
    blocks: Vec<MaxBlock>,
    bounds: Option<Bounds>,
    additive_const: f64,
    qubo: Option<QuboAttachment>,
}

/// Per-block ε-active description at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ActiveSet {
    pub eps: f64,
    pub blocks: Vec<BlockActive>,
}

impl ActiveSet {
    pub fn single(&self) -> &[usize] {
        match &self.blocks[0] {
            BlockActive::Pieces(p) => p,
            BlockActive::Subset(_) => &[],
        }
    }

    /// Number of aggregate vertices, saturating.
    pub fn aggregate_count(&self) -> u128 {
        self.blocks.iter().fold(1u128, |acc, b| acc.saturating_mul(b.choice_count()))
    }
}

impl DcProgram {
    pub fn new(
        g: ConvexPart,
        blocks: Vec<MaxBlock>,
        bounds: Option<Bounds>,
        additive_const: f64,
    ) -> Result<Self> {
        let n = g.dim();
        if n == 0 {
            return Err(Error::InvalidInput("program dimension must be positive".into()));
        }
        if blocks.is_empty() {
            return Err(Error::InvalidInput("program needs at least one max block".into()));
        }
        for b in &blocks {
            check_dim(n, b.dim())?;
        }
        if let Some(bx) = &bounds {
            check_dim(n, bx.lower.len())?;
            check_dim(n, bx.upper.len())?;
            if bx.lower.iter().zip(&bx.upper).any(|(l, u)| !(l <= u)) {
                return Err(Error::InvalidInput("box lower bound exceeds upper bound".into()));
            }
        }
        if !additive_const.is_finite() {
            return Err(Error::InvalidInput("non-finite additive constant".into()));
        }
        Ok(Self { g, blocks, bounds, additive_const, qubo: None })
    }

    pub fn with_qubo(mut self, q: DenseSymmetricMatrix) -> Result<Self> {
        check_dim(self.dim(), q.n())?;
        self.qubo = Some(QuboAttachment { q });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn g(&self) -> &ConvexPart {
        &self.g
    }

    pub fn blocks(&self) -> &[MaxBlock] {
        &self.blocks
    }

    pub fn bounds(&self) -> Option<&Bounds> {
        self.bounds.as_ref()
    }

    pub fn additive_const(&self) -> f64 {
        self.additive_const
    }

    pub fn qubo(&self) -> Option<&QuboAttachment> {
        self.qubo.as_ref()
    }

    pub fn is_single_block(&self) -> bool {
        self.blocks.len() == 1 && self.blocks[0].is_explicit()
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())
    }

    /// `Σ_ℓ w_ℓ h_ℓ(x)`
    pub fn h(&self, x: &[f64]) -> f64 {
        self.blocks.iter().map(|b| b.weight * b.value(x)).sum()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.g.value(x) - self.h(x) + self.additive_const)
    }

    pub fn grad_g(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.g.gradient(x))
    }

    pub fn active_set(&self, x: &[f64], eps: f64) -> Result<ActiveSet> {
        self.check_point(x)?;
        if !(eps >= 0.0) {
            return Err(Error::InvalidInput(format!("active-set tolerance must be >= 0, got {eps}")));
        }
        Ok(ActiveSet { eps, blocks: self.blocks.iter().map(|b| b.active(x, eps)).collect() })
    }

    /// Active gradient columns per block; fails when `active` is stale at `x`.
    pub fn active_gradients(&self, x: &[f64], active: &ActiveSet) -> Result<Vec<BlockGradients<'_>>> {
        self.check_point(x)?;
        self.gradients_impl(x, active, true)
    }

    pub(crate) fn gradients_impl(
        &self,
        x: &[f64],
        active: &ActiveSet,
        recheck: bool,
    ) -> Result<Vec<BlockGradients<'_>>> {
        check_dim(self.blocks.len(), active.blocks.len())?;
        self.blocks
            .iter()
            .zip(&active.blocks)
            .map(|(b, a)| b.gradients(x, a, active.eps, recheck))
            .collect()
    }

    /// Sum over blocks of `w_ℓ` times the largest gap admitted by the active
    /// description in that block. Bounds the linearization error in the descent estimate.
    pub fn descent_slack(&self, active: &ActiveSet) -> f64 {
        self.blocks
            .iter()
            .zip(&active.blocks)
            .map(|(b, a)| {
                b.weight
                    * match a {
                        BlockActive::Pieces(_) => active.eps,
                        BlockActive::Subset(s) => s.gap_bound,
                    }
            })
            .sum()
    }

    /// Maps `w = ∇g − v` to its violation of box stationarity: coordinates at a
    /// bound keep only the part pointing out of the feasible cone.
    pub fn box_face(&self, x: &[f64], w: &mut [f64]) {
        let Some(bx) = &self.bounds else { return };
        for i in 0..w.len() {
            w[i] = bx.face(i, x[i], w[i]);
        }
    }

    pub fn project(&self, x: &mut [f64]) {
        if let Some(bx) = &self.bounds {
            ops::clip_box(x, &bx.lower, &bx.upper);
        }
    }

    /// Rounds `z_i = 1{x_i ≥ ½}` and evaluates the attached binary quadratic.
    pub fn round_binary(&self, x: &[f64]) -> Result<(Vec<u8>, f64)> {
        let q = self
            .qubo
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("program carries no binary quadratic".into()))?;
        self.check_point(x)?;
        Ok(round_binary(&q.q, x))
    }
}

pub(crate) fn round_binary(q: &DenseSymmetricMatrix, x: &[f64]) -> (Vec<u8>, f64) {
    let z: Vec<u8> = x.iter().map(|v| u8::from(*v >= 0.5)).collect();
    let zf: Vec<f64> = z.iter().map(|b| *b as f64).collect();
    (z, q.quad_form(&zf))
}
