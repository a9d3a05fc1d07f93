//! Random direction matrices, embedding budgets and sampled vertex residuals.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::model::Column;
use crate::numerics::{ops, sym_eigendecomp, DenseMatrix, DenseSymmetricMatrix, DEFAULT_DENSE_CAP};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SketchKind {
    /// Entries `N(0, 1/m)`.
    GaussianRows,
    /// Uniform unit rows scaled to norm `√(n/m)`.
    ScaledSphereRows,
    /// `D = I`, the full-space limit.
    Identity,
}

/// An `m × n` direction matrix, stored column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchMatrix {
    m: usize,
    n: usize,
    kind: SketchKind,
    seed: u64,
    cols: Vec<f64>,
}

pub fn draw_sketch(m: usize, n: usize, kind: SketchKind, seed: u64) -> Result<SketchMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput(format!("sketch needs m, n >= 1, got {m} x {n}")));
    }
    if kind == SketchKind::Identity {
        if m != n {
            return Err(Error::InvalidInput("identity sketch needs m = n".into()));
        }
        return Ok(SketchMatrix::identity(n));
    }
    let mut rng = rng::stream(seed, &[m as u64, n as u64]);
    let mut rows = vec![0.0; m * n];
    for v in rows.iter_mut() {
        *v = rng.sample::<f64, _>(StandardNormal);
    }
    match kind {
        SketchKind::GaussianRows => {
            let s = 1.0 / (m as f64).sqrt();
            rows.iter_mut().for_each(|v| *v *= s);
        }
        SketchKind::ScaledSphereRows => {
            let target = (n as f64 / m as f64).sqrt();
            for r in rows.chunks_mut(n) {
                let nr = ops::norm2(r);
                r.iter_mut().for_each(|v| *v *= target / nr);
            }
        }
        SketchKind::Identity => unreachable!(),
    }
    let mut cols = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            cols[j * m + i] = rows[i * n + j];
        }
    }
    Ok(SketchMatrix { m, n, kind, seed, cols })
}

impl SketchMatrix {
    pub fn identity(n: usize) -> Self {
        Self { m: n, n, kind: SketchKind::Identity, seed: 0, cols: Vec::new() }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_identity(&self) -> bool {
        self.kind == SketchKind::Identity
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.is_identity() {
            f64::from(u8::from(i == j))
        } else {
            self.cols[j * self.m + i]
        }
    }

    /// Column `j` of `D`.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.m..(j + 1) * self.m]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|j| self.get(i, j)).collect()
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        debug_assert_eq!(z.len(), self.n);
        if self.is_identity() {
            return z.to_vec();
        }
        let mut out = vec![0.0; self.m];
        for (j, zj) in z.iter().enumerate() {
            if *zj != 0.0 {
                ops::axpy(*zj, self.column(j), &mut out);
            }
        }
        out
    }

    /// `out += s · D c`
    pub fn apply_column_into(&self, c: &Column<'_>, s: f64, out: &mut [f64]) {
        if self.is_identity() {
            c.add_to(s, out);
            return;
        }
        c.for_each(|j, v| {
            if v != 0.0 {
                ops::axpy(s * v, self.column(j), out);
            }
        });
    }

    pub fn apply_column(&self, c: &Column<'_>) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        self.apply_column_into(c, 1.0, &mut out);
        out
    }

    /// `out += s · D e_j`
    pub fn add_unit(&self, j: usize, s: f64, out: &mut [f64]) {
        if self.is_identity() {
            out[j] += s;
        } else {
            ops::axpy(s, self.column(j), out);
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.m, self.n);
        for i in 0..self.m {
            for j in 0..self.n {
                d.set(i, j, self.get(i, j));
            }
        }
        d
    }
}

/// `m = ⌈C η⁻² (d + ln(1/δ))⌉`.
pub fn embedding_budget(d: usize, eta: f64, delta: f64, c: f64) -> Result<usize> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidInput(format!("eta must lie in (0, 1), got {eta}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!("budget constant must be positive, got {c}")));
    }
    let m = (c / (eta * eta) * (d as f64 + (1.0 / delta).ln())).ceil();
    Ok((m as usize).max(1))
}

/// `(max_i ‖D(G_i − g)‖, smallest attaining i)`.
pub fn sampled_vertex_residual(d: &SketchMatrix, cols: &[Column<'_>], g: &[f64]) -> Result<(f64, usize)> {
    check_dim(d.n(), g.len())?;
    if cols.is_empty() {
        return Err(Error::InvalidInput("no active gradient columns".into()));
    }
    let dg = d.apply(g);
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, c) in cols.iter().enumerate() {
        let r = match c {
            Column::Dense(_) | Column::Slice(_) => {
                let mut z = c.to_dense(g.len());
                z.iter_mut().zip(g).for_each(|(zi, gi)| *zi -= gi);
                ops::norm2(&d.apply(&z))
            }
            Column::Row { .. } => {
                let mut z = d.apply_column(c);
                ops::axpy(-1.0, &dg, &mut z);
                ops::norm2(&z)
            }
        };
        if r > best.0 {
            best = (r, i);
        }
    }
    Ok(best)
}

/// Extreme singular values of `DU` for an orthonormal basis `U` (columns).
pub fn distortion_on_span(d: &SketchMatrix, u: &DenseMatrix) -> Result<(f64, f64)> {
    check_dim(d.n(), u.rows())?;
    let k = u.cols();
    if k == 0 {
        return Err(Error::InvalidInput("empty basis".into()));
    }
    let ucols: Vec<Vec<f64>> = (0..k).map(|j| u.column(j)).collect();
    for i in 0..k {
        for j in 0..=i {
            let want = if i == j { 1.0 } else { 0.0 };
            if (ops::dot(&ucols[i], &ucols[j]) - want).abs() > 1e-10 {
                return Err(Error::InvalidInput("basis is not orthonormal".into()));
            }
        }
    }
    let du: Vec<Vec<f64>> = ucols.iter().map(|c| d.apply(c)).collect();
    let gram = DenseSymmetricMatrix::from_fn(k, |i, j| ops::dot(&du[i], &du[j]))?;
    let e = sym_eigendecomp(&gram, DEFAULT_DENSE_CAP.max(k))?;
    Ok((e.lambda_min().max(0.0).sqrt(), e.lambda_max().max(0.0).sqrt()))
}
