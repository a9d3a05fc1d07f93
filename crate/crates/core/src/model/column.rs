use crate::numerics::{ops, SparseMatrixCSR};

/// One gradient column, either materialized or borrowed from program data.
#[derive(Clone, Debug)]
pub enum Column<'a> {
    Dense(Vec<f64>),
    Slice(&'a [f64]),
    Row { rows: &'a SparseMatrixCSR, row: usize, scale: f64 },
}

impl Column<'_> {
    /// `out += s * self`
    pub fn add_to(&self, s: f64, out: &mut [f64]) {
        match self {
            Column::Dense(v) => ops::axpy(s, v, out),
            Column::Slice(v) => ops::axpy(s, v, out),
            Column::Row { rows, row, scale } => rows.add_row_to(*row, s * scale, out),
        }
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        match self {
            Column::Dense(v) => ops::dot(v, x),
            Column::Slice(v) => ops::dot(v, x),
            Column::Row { rows, row, scale } => scale * rows.row_dot(*row, x),
        }
    }

    pub fn norm2_sq(&self) -> f64 {
        match self {
            Column::Dense(v) => ops::norm2_sq(v),
            Column::Slice(v) => ops::norm2_sq(v),
            Column::Row { rows, row, scale } => scale * scale * rows.row_norm2_sq(*row),
        }
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        match self {
            Column::Dense(v) => v.clone(),
            Column::Slice(v) => v.to_vec(),
            Column::Row { .. } => {
                let mut out = vec![0.0; n];
                self.add_to(1.0, &mut out);
                out
            }
        }
    }

    /// Visits the nonzero pattern as `(index, value)` pairs.
    pub fn for_each(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            Column::Dense(v) => v.iter().enumerate().for_each(|(i, x)| f(i, *x)),
            Column::Slice(v) => v.iter().enumerate().for_each(|(i, x)| f(i, *x)),
            Column::Row { rows, row, scale } => {
                let (idx, val) = rows.row(*row);
                idx.iter().zip(val).for_each(|(i, x)| f(*i, scale * x));
            }
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Column::Row { .. })
    }
}

/// A candidate active gradient inside one block. `id` is the piece index for
/// explicit blocks and the element index for subset blocks.
#[derive(Clone, Debug)]
pub struct Candidate<'a> {
    pub id: usize,
    pub col: Column<'a>,
}

/// Active gradient data of one block at a point.
///
/// An aggregate contribution of the block is
/// `weight * (fixed + Σ of `needed` candidates with distinct ids)`.
#[derive(Clone, Debug)]
pub struct BlockGradients<'a> {
    pub weight: f64,
    pub fixed: Option<Vec<f64>>,
    pub fixed_ids: Vec<usize>,
    pub candidates: Vec<Candidate<'a>>,
    pub needed: usize,
}

impl<'a> BlockGradients<'a> {
    pub fn is_explicit(&self) -> bool {
        self.needed == 1 && self.fixed.is_none()
    }

    /// True when the block contributes the same vector for every choice.
    pub fn is_determined(&self) -> bool {
        let distinct = {
            let mut ids: Vec<usize> = self.candidates.iter().map(|c| c.id).collect();
            ids.dedup();
            ids.len()
        };
        self.needed == 0 || (self.candidates.len() == self.needed && distinct == self.needed)
    }

    /// `out += weight * (fixed + Σ chosen)` for the given candidate positions.
    pub fn add_choice(&self, chosen: &[usize], out: &mut [f64]) {
        if let Some(f) = &self.fixed {
            ops::axpy(self.weight, f, out);
        }
        for &c in chosen {
            self.candidates[c].col.add_to(self.weight, out);
        }
    }

    pub fn add_fixed(&self, out: &mut [f64]) {
        if let Some(f) = &self.fixed {
            ops::axpy(self.weight, f, out);
        }
    }
}
