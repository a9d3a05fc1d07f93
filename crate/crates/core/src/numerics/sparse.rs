use serde::{Deserialize, Serialize};

use super::ops;
use crate::error::{check_dim, Error, Result};

/// Compressed sparse row matrix with strictly increasing column indices per row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrixCSR {
    n_rows: usize,
    n_cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCSR {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        offsets: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_dim(n_rows + 1, offsets.len())?;
        check_dim(indices.len(), values.len())?;
        if offsets[0] != 0 || offsets[n_rows] != indices.len() {
            return Err(Error::InvalidInput("row offsets do not span the index array".into()));
        }
        for r in 0..n_rows {
            let (s, e) = (offsets[r], offsets[r + 1]);
            if s > e {
                return Err(Error::InvalidInput(format!("row offsets decrease at row {r}")));
            }
            for k in s..e {
                if indices[k] >= n_cols {
                    return Err(Error::InvalidInput(format!(
                        "column {} out of range in row {r}",
                        indices[k]
                    )));
                }
                if k > s && indices[k] <= indices[k - 1] {
                    return Err(Error::InvalidInput(format!(
                        "column indices not strictly increasing in row {r}"
                    )));
                }
            }
        }
        if !ops::all_finite(&values) {
            return Err(Error::InvalidInput("non-finite sparse value".into()));
        }
        Ok(Self { n_rows, n_cols, offsets, indices, values })
    }

    /// Builds from per-row `(column, value)` lists; each row is sorted and
    /// duplicate columns are summed.
    pub fn from_rows(n_cols: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for row in rows {
            let mut r = row.clone();
            r.sort_by_key(|e| e.0);
            for (c, v) in r {
                if indices.len() > *offsets.last().unwrap() && *indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                }
            }
            offsets.push(indices.len());
        }
        Self::new(rows.len(), n_cols, offsets, indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            offsets: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.offsets[r], self.offsets[r + 1]);
        (&self.indices[s..e], &self.values[s..e])
    }

    #[inline]
    pub fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(r);
        idx.iter().zip(val).map(|(c, v)| v * x[*c]).sum()
    }

    pub fn row_norm2_sq(&self, r: usize) -> f64 {
        ops::norm2_sq(self.row(r).1)
    }

    /// `out += s * row_r`
    #[inline]
    pub fn add_row_to(&self, r: usize, s: f64, out: &mut [f64]) {
        let (idx, val) = self.row(r);
        for (c, v) in idx.iter().zip(val) {
            out[*c] += s * v;
        }
    }

    pub fn row_dense(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        self.add_row_to(r, 1.0, &mut out);
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows).map(|r| self.row_dot(r, x)).collect()
    }

    /// `Aᵀ y`
    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.n_rows);
        let mut out = vec![0.0; self.n_cols];
        for (r, yr) in y.iter().enumerate() {
            if *yr != 0.0 {
                self.add_row_to(r, *yr, &mut out);
            }
        }
        out
    }

    /// Returns the matrix without all-zero rows and the kept row indices.
    pub fn without_zero_rows(&self) -> (Self, Vec<usize>) {
        let keep: Vec<usize> =
            (0..self.n_rows).filter(|&r| self.row(r).1.iter().any(|v| *v != 0.0)).collect();
        let rows: Vec<Vec<(usize, f64)>> = keep
            .iter()
            .map(|&r| {
                let (i, v) = self.row(r);
                i.iter().copied().zip(v.iter().copied()).filter(|e| e.1 != 0.0).collect()
            })
            .collect();
        (Self::from_rows(self.n_cols, &rows).expect("subset of a valid matrix"), keep)
    }

    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let rows: Vec<Vec<(usize, f64)>> = keep
            .iter()
            .map(|&r| {
                let (i, v) = self.row(r);
                i.iter().copied().zip(v.iter().copied()).collect()
            })
            .collect();
        Self::from_rows(self.n_cols, &rows).expect("subset of a valid matrix")
    }

    pub fn with_n_cols(mut self, n_cols: usize) -> Result<Self> {
        if self.indices.iter().any(|c| *c >= n_cols) {
            return Err(Error::InvalidInput(format!("column index exceeds dimension {n_cols}")));
        }
        self.n_cols = n_cols;
        Ok(self)
    }

    /// Upper bound on ‖A‖₂² by power iteration on AᵀA.
    pub fn spectral_norm_sq(&self, iters: usize) -> f64 {
        if self.nnz() == 0 {
            return 0.0;
        }
        let n = self.n_cols;
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0).collect();
        let nv = ops::norm2(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let mut est = 0.0;
        for _ in 0..iters {
            let w = self.matvec_t(&self.matvec(&v));
            let nw = ops::norm2(&w);
            if nw == 0.0 {
                return 0.0;
            }
            let prev = est;
            est = nw;
            v = w.into_iter().map(|x| x / nw).collect();
            if (est - prev).abs() <= 1e-12 * est {
                break;
            }
        }
        est * (1.0 + 1e-6)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_structure() {
        assert!(SparseMatrixCSR::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrixCSR::new(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
        assert!(SparseMatrixCSR::new(2, 2, vec![0, 1, 0], vec![0], vec![1.0]).is_err());
        assert!(SparseMatrixCSR::new(1, 3, vec![0, 2], vec![0, 2], vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn products_and_zero_rows() {
        let a = SparseMatrixCSR::from_rows(3, &[vec![(2, 1.0), (0, 2.0)], vec![], vec![(1, -1.0)]])
            .unwrap();
        assert_eq!(a.matvec(&[1.0, 2.0, 3.0]), vec![5.0, 0.0, -2.0]);
        assert_eq!(a.matvec_t(&[1.0, 5.0, 1.0]), vec![2.0, -1.0, 1.0]);
        let (b, keep) = a.without_zero_rows();
        assert_eq!(b.n_rows(), 2);
        assert_eq!(keep, vec![0, 2]);
        assert!((a.spectral_norm_sq(500) - 5.0).abs() < 1e-4);
    }
}
