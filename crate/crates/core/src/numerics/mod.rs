//! Dense and sparse kernels plus symmetric eigen utilities.

mod dense;
mod eig;
pub mod ops;
mod sparse;

pub use dense::{DenseMatrix, DenseSymmetricMatrix, DenseVector};
pub use eig::{power_iteration_extreme_eigs, sym_eigendecomp, SymEigen, DEFAULT_DENSE_CAP};
pub use sparse::SparseMatrixCSR;
