use serde::{Deserialize, Serialize};

use super::column::Column;
use crate::error::{Error, Result};
use crate::numerics::{ops, DenseSymmetricMatrix};

/// A smooth convex piece of a max term.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SmoothPiece {
    /// `aᵀx + b`
    Affine { a: Vec<f64>, b: f64 },
    /// `aᵀx + (γ/2)‖x‖²`
    AffinePlusQuad { a: Vec<f64>, gamma: f64 },
    /// `½ xᵀHx` with `H` PSD
    Quadratic { h: DenseSymmetricMatrix },
}

impl SmoothPiece {
    pub fn affine(a: Vec<f64>, b: f64) -> Result<Self> {
        if !ops::all_finite(&a) || !b.is_finite() {
            return Err(Error::InvalidInput("non-finite affine piece".into()));
        }
        Ok(Self::Affine { a, b })
    }

    pub fn affine_plus_quad(a: Vec<f64>, gamma: f64) -> Result<Self> {
        if !ops::all_finite(&a) || !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidInput(format!("piece needs finite a and gamma >= 0, got {gamma}")));
        }
        Ok(Self::AffinePlusQuad { a, gamma })
    }

    pub fn quadratic(h: DenseSymmetricMatrix) -> Self {
        Self::Quadratic { h }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Affine { a, .. } | Self::AffinePlusQuad { a, .. } => a.len(),
            Self::Quadratic { h } => h.n(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Affine { a, b } => ops::dot(a, x) + b,
            Self::AffinePlusQuad { a, gamma } => ops::dot(a, x) + 0.5 * gamma * ops::norm2_sq(x),
            Self::Quadratic { h } => 0.5 * h.quad_form(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Column<'_> {
        match self {
            Self::Affine { a, .. } => Column::Slice(a),
            Self::AffinePlusQuad { a, gamma } => {
                let mut g = a.clone();
                ops::axpy(*gamma, x, &mut g);
                Column::Dense(g)
            }
            Self::Quadratic { h } => Column::Dense(h.matvec(x)),
        }
    }

    /// Lipschitz constant of the gradient.
    pub fn curvature(&self) -> f64 {
        match self {
            Self::Affine { .. } => 0.0,
            Self::AffinePlusQuad { gamma, .. } => *gamma,
            Self::Quadratic { h } => h.gershgorin_radius(),
        }
    }
}
