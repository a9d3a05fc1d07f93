use crate::error::Result;
use crate::numerics::{power_iteration_extreme_eigs, sym_eigendecomp, DenseSymmetricMatrix, DEFAULT_DENSE_CAP};

/// `Q = plus − minus` with both parts PSD.
#[derive(Clone, Debug)]
pub struct DcSplit {
    pub plus: DenseSymmetricMatrix,
    pub minus: DenseSymmetricMatrix,
    /// The matrix that was split.
    pub q: DenseSymmetricMatrix,
    /// Diagonal shift for the shift split.
    pub gamma: Option<f64>,
}

fn lambda_min(q: &DenseSymmetricMatrix) -> Result<f64> {
    if q.n() <= DEFAULT_DENSE_CAP {
        Ok(sym_eigendecomp(q, DEFAULT_DENSE_CAP)?.lambda_min())
    } else {
        Ok(power_iteration_extreme_eigs(q, 20_000, 1e-10)?.1)
    }
}

/// `plus = Q + γI`, `minus = γI` with `γ = max(0, −λ_min(Q)) + 1`.
pub fn dc_split_shift(q: &DenseSymmetricMatrix) -> Result<DcSplit> {
    let gamma = (-lambda_min(q)?).max(0.0) + 1.0;
    let n = q.n();
    Ok(DcSplit { plus: q.add_diagonal(gamma), minus: DenseSymmetricMatrix::identity(n)?.scaled(gamma), gamma: Some(gamma), q: q.clone() })
}

/// Separates the positive and negative eigenvalues of `Q`.
pub fn dc_split_spectral(q: &DenseSymmetricMatrix) -> Result<DcSplit> {
    let e = sym_eigendecomp(q, DEFAULT_DENSE_CAP)?;
    let plus = e.reconstruct_with(|l| l.max(0.0))?;
    let minus = e.reconstruct_with(|l| (-l).max(0.0))?;
    Ok(DcSplit { plus, minus, gamma: None, q: q.clone() })
}
