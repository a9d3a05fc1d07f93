use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{
    ops, power_iteration_extreme_eigs, sym_eigendecomp, DenseSymmetricMatrix, SparseMatrixCSR,
    DEFAULT_DENSE_CAP,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum ConvexKind {
    /// `(c/2)‖x‖²`
    ScaledIdentity { c: f64 },
    /// `½ xᵀHx`
    Quadratic { h: DenseSymmetricMatrix },
    /// `(scale/2)‖Xx − y‖² + (λ/2)‖x‖²`
    RidgeLeastSquares { x: SparseMatrixCSR, y: Vec<f64>, lambda: f64, scale: f64 },
}

/// The smooth convex part `g(x) = kind(x) + fᵀx + const`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexPart {
    kind: ConvexKind,
    dim: usize,
    linear: Option<Vec<f64>>,
    constant: f64,
    strong_convexity: f64,
    lipschitz: f64,
}

impl ConvexPart {
    pub fn scaled_identity(n: usize, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!("scaled identity needs c > 0, got {c}")));
        }
        Ok(Self {
            kind: ConvexKind::ScaledIdentity { c },
            dim: n,
            linear: None,
            constant: 0.0,
            strong_convexity: c,
            lipschitz: c,
        })
    }

    /// `½ xᵀHx + fᵀx + constant`; `H` must be PSD up to `1e-8‖H‖`.
    pub fn general_quad(h: DenseSymmetricMatrix, f: Vec<f64>, constant: f64) -> Result<Self> {
        let n = h.n();
        check_dim(n, f.len())?;
        let (lmin, lmax) = if n <= DEFAULT_DENSE_CAP {
            let e = sym_eigendecomp(&h, DEFAULT_DENSE_CAP)?;
            (e.lambda_min(), e.lambda_max())
        } else {
            let (hi, lo) = power_iteration_extreme_eigs(&h, 20_000, 1e-10)?;
            (lo, hi)
        };
        if lmin < -1e-8 * h.max_abs().max(1.0) {
            return Err(Error::InvalidInput(format!("quadratic part not PSD (lambda_min = {lmin:e})")));
        }
        Self {
            kind: ConvexKind::Quadratic { h },
            dim: n,
            linear: None,
            constant: 0.0,
            strong_convexity: lmin.max(0.0),
            lipschitz: lmax.max(0.0),
        }
        .with_linear(f, constant)
    }

    pub fn ridge(x: SparseMatrixCSR, y: Vec<f64>, lambda: f64, scale: f64) -> Result<Self> {
        check_dim(x.n_rows(), y.len())?;
        if !(lambda >= 0.0 && scale >= 0.0) || !ops::all_finite(&y) {
            return Err(Error::InvalidInput("ridge needs lambda, scale >= 0 and finite y".into()));
        }
        let lip = scale * x.spectral_norm_sq(500) + lambda;
        Ok(Self {
            dim: x.n_cols(),
            kind: ConvexKind::RidgeLeastSquares { x, y, lambda, scale },
            linear: None,
            constant: 0.0,
            strong_convexity: lambda,
            lipschitz: lip,
        })
    }

    /// Adds `fᵀx + constant` to the part.
    pub fn with_linear(mut self, f: Vec<f64>, constant: f64) -> Result<Self> {
        check_dim(self.dim, f.len())?;
        if !ops::all_finite(&f) || !constant.is_finite() {
            return Err(Error::InvalidInput("non-finite linear term".into()));
        }
        self.linear = if f.iter().all(|v| *v == 0.0) { None } else { Some(f) };
        self.constant = constant;
        Ok(self)
    }

    pub fn kind(&self) -> &ConvexKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn linear(&self) -> Option<&[f64]> {
        self.linear.as_deref()
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn strong_convexity(&self) -> f64 {
        self.strong_convexity
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let base = match &self.kind {
            ConvexKind::ScaledIdentity { c } => 0.5 * c * ops::norm2_sq(x),
            ConvexKind::Quadratic { h } => 0.5 * h.quad_form(x),
            ConvexKind::RidgeLeastSquares { x: a, y, lambda, scale } => {
                let r = ops::sub(&a.matvec(x), y);
                0.5 * scale * ops::norm2_sq(&r) + 0.5 * lambda * ops::norm2_sq(x)
            }
        };
        base + self.linear.as_ref().map_or(0.0, |f| ops::dot(f, x)) + self.constant
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = match &self.kind {
            ConvexKind::ScaledIdentity { c } => ops::scale(*c, x),
            ConvexKind::Quadratic { h } => h.matvec(x),
            ConvexKind::RidgeLeastSquares { x: a, y, lambda, scale } => {
                let r = ops::sub(&a.matvec(x), y);
                let mut g = ops::scale(*scale, &a.matvec_t(&r));
                ops::axpy(*lambda, x, &mut g);
                g
            }
        };
        if let Some(f) = &self.linear {
            ops::axpy(1.0, f, &mut g);
        }
        g
    }

    /// Hessian-vector product (the part is quadratic).
    pub fn hess_vec(&self, d: &[f64]) -> Vec<f64> {
        match &self.kind {
            ConvexKind::ScaledIdentity { c } => ops::scale(*c, d),
            ConvexKind::Quadratic { h } => h.matvec(d),
            ConvexKind::RidgeLeastSquares { x: a, lambda, scale, .. } => {
                let mut g = ops::scale(*scale, &a.matvec_t(&a.matvec(d)));
                ops::axpy(*lambda, d, &mut g);
                g
            }
        }
    }
}
