use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::ops;
use crate::error::{check_dim, Error, Result};

/// A real vector whose public constructors reject non-finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite entry at index {i}")));
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl TryFrom<&[f64]> for DenseVector {
    type Error = Error;

    fn try_from(v: &[f64]) -> Result<Self> {
        Self::new(v.to_vec())
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        if !ops::all_finite(&data) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            check_dim(rows, c.len())?;
            for (i, v) in c.iter().enumerate() {
                m.data[i * cols + j] = *v;
            }
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| ops::dot(self.row(i), x)).collect()
    }

    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, yi) in y.iter().enumerate() {
            ops::axpy(*yi, self.row(i), &mut out);
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dim(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                ops::axpy(a, orow, dst);
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        ops::norm_inf(&self.data)
    }
}

/// Symmetric matrix stored as its packed lower triangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseSymmetricMatrix {
    n: usize,
    lower: Vec<f64>,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl DenseSymmetricMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("symmetric matrix needs n >= 1".into()));
        }
        Ok(Self { n, lower: vec![0.0; n * (n + 1) / 2] })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(d.len())?;
        for (i, v) in d.iter().enumerate() {
            m.set(i, i, *v);
        }
        m.check_finite()?;
        Ok(m)
    }

    /// Builds from a row-major full matrix, averaging the two triangles.
    /// Entries that disagree by more than `1e-12 * (1 + max|A|)` are rejected.
    pub fn from_full(n: usize, data: &[f64]) -> Result<Self> {
        check_dim(n * n, data.len())?;
        let mut m = Self::zeros(n)?;
        let scale = 1.0 + ops::norm_inf(data);
        for i in 0..n {
            for j in 0..=i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::InvalidInput(format!("matrix not symmetric at ({i}, {j})")));
                }
                m.set(i, j, 0.5 * (a + b));
            }
        }
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m.check_finite()?;
        Ok(m)
    }

    fn check_finite(&self) -> Result<()> {
        if ops::all_finite(&self.lower) {
            Ok(())
        } else {
            Err(Error::InvalidInput("non-finite matrix entry".into()))
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[packed(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.lower[packed(i, j)] = v;
    }

    pub fn packed_lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let mut k = 0;
        for i in 0..self.n {
            let mut acc = 0.0;
            let xi = x[i];
            for j in 0..i {
                let a = self.lower[k];
                acc += a * x[j];
                y[j] += a * xi;
                k += 1;
            }
            acc += self.lower[k] * xi;
            k += 1;
            y[i] += acc;
        }
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        ops::dot(x, &self.matvec(x))
    }

    pub fn to_full(&self) -> DenseMatrix {
        let n = self.n;
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        ops::norm_inf(&self.lower)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, lower: self.lower.iter().map(|v| s * v).collect() }
    }

    pub fn add_diagonal(&self, shift: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            let v = m.get(i, i);
            m.set(i, i, v + shift);
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            lower: self.lower.iter().zip(&other.lower).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest absolute row sum; bounds the spectral radius.
    pub fn gershgorin_radius(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_vector_rejects_non_finite() {
        assert!(DenseVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(DenseVector::new(vec![f64::INFINITY]).is_err());
        assert_eq!(DenseVector::new(vec![1.0, 2.0]).unwrap().len(), 2);
    }

    #[test]
    fn packed_symmetric_matvec_matches_full() {
        let a = DenseSymmetricMatrix::from_fn(4, |i, j| (i * 3 + j) as f64 - 2.5).unwrap();
        let x = [1.0, -2.0, 0.5, 3.0];
        let full = a.to_full();
        assert_eq!(a.get(1, 3), a.get(3, 1));
        let y1 = a.matvec(&x);
        let y2 = full.matvec(&x);
        assert!(ops::max_abs_diff(&y1, &y2) < 1e-14);
    }

    #[test]
    fn from_full_rejects_asymmetric() {
        assert!(DenseSymmetricMatrix::from_full(2, &[1.0, 2.0, 3.0, 1.0]).is_err());
        assert!(DenseSymmetricMatrix::zeros(0).is_err());
    }

    #[test]
    fn matmul_and_transpose() {
        let a = DenseMatrix::from_row_major(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let p = a.matmul(&a.transpose()).unwrap();
        assert_eq!(p.data(), &[14., 32., 32., 77.]);
        assert_eq!(a.matvec_t(&[1.0, 1.0]), vec![5., 7., 9.]);
    }
}
