use super::dense::{DenseMatrix, DenseSymmetricMatrix, DenseVector};
use super::ops;
use crate::error::{Error, Result};

pub const DEFAULT_DENSE_CAP: usize = 512;

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: DenseVector,
    pub vectors: DenseMatrix,
}

impl SymEigen {
    pub fn lambda_min(&self) -> f64 {
        self.values[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Rebuilds `V diag(f(λ)) Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Result<DenseSymmetricMatrix> {
        let n = self.values.len();
        let v = &self.vectors;
        let d: Vec<f64> = self.values.iter().map(|l| f(*l)).collect();
        DenseSymmetricMatrix::from_fn(n, |i, j| (0..n).map(|k| v.get(i, k) * d[k] * v.get(j, k)).sum())
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn sym_eigendecomp(a: &DenseSymmetricMatrix, cap: usize) -> Result<SymEigen> {
    let n = a.n();
    if n > cap {
        return Err(Error::SizeLimit { size: n, limit: cap });
    }
    if !ops::all_finite(a.packed_lower()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let mut m = a.to_full();
    let mut v = DenseMatrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j) * m.get(i, j))
            .sum();
        if off.sqrt() <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).total_cmp(&m.get(j, j)).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, new, v.get(k, old));
        }
    }
    Ok(SymEigen { values: DenseVector::new(values)?, vectors })
}

fn start_vector(n: usize) -> Vec<f64> {
    // Deterministic, generic start: a fixed pseudo-random pattern.
    let mut s = 0x2545_f491_4f6c_dd1du64;
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let nv = ops::norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    v
}

/// Dominant eigenvalue of `sign * A + shift * I`, which is PSD by choice of shift.
fn shifted_power(a: &DenseSymmetricMatrix, sign: f64, shift: f64, iters: usize, tol: f64) -> f64 {
    let n = a.n();
    let mut q = start_vector(n);
    let mut w = vec![0.0; n];
    let mut rho = 0.0;
    for _ in 0..iters {
        a.matvec_into(&q, &mut w);
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi = sign * *wi + shift * qi;
        }
        rho = ops::dot(&q, &w);
        let res: f64 = w.iter().zip(&q).map(|(wi, qi)| (wi - rho * qi).powi(2)).sum::<f64>().sqrt();
        let nw = ops::norm2(&w);
        if nw == 0.0 {
            return 0.0;
        }
        if res <= tol * shift {
            break;
        }
        for (qi, wi) in q.iter_mut().zip(&w) {
            *qi = wi / nw;
        }
    }
    rho
}

/// Extreme eigenvalue estimates by power iteration on Gershgorin-shifted matrices.
pub fn power_iteration_extreme_eigs(
    a: &DenseSymmetricMatrix,
    iters: usize,
    tol: f64,
) -> Result<(f64, f64)> {
    if iters == 0 {
        return Err(Error::InvalidInput("power iteration needs iters >= 1".into()));
    }
    if !ops::all_finite(a.packed_lower()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let s = a.gershgorin_radius();
    if s == 0.0 {
        return Ok((0.0, 0.0));
    }
    let lmax = shifted_power(a, 1.0, s, iters, tol) - s;
    let lmin = s - shifted_power(a, -1.0, s, iters, tol);
    Ok((lmax.max(lmin), lmin.min(lmax)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form() {
        let a = DenseSymmetricMatrix::from_full(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let (hi, lo) = power_iteration_extreme_eigs(&a, 5000, 1e-12).unwrap();
        assert!((hi - 1.0).abs() < 1e-9 && (lo + 1.0).abs() < 1e-9);
        let e = sym_eigendecomp(&a, DEFAULT_DENSE_CAP).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_cases() {
        let a = DenseSymmetricMatrix::diagonal(&[4.0, -2.0]).unwrap();
        let (hi, lo) = power_iteration_extreme_eigs(&a, 1000, 1e-12).unwrap();
        assert!((hi - 4.0).abs() < 1e-9 && (lo + 2.0).abs() < 1e-9);
        let i3 = DenseSymmetricMatrix::identity(3).unwrap();
        let (hi, lo) = power_iteration_extreme_eigs(&i3, 10, 1e-12).unwrap();
        assert!((hi - 1.0).abs() < 1e-12 && (lo - 1.0).abs() < 1e-12);
        let e = sym_eigendecomp(&DenseSymmetricMatrix::diagonal(&[1.0, -2.0]).unwrap(), 512).unwrap();
        assert_eq!(e.values.as_slice(), &[-2.0, 1.0]);
    }

    #[test]
    fn cap_and_bad_input() {
        let a = DenseSymmetricMatrix::identity(5).unwrap();
        assert!(matches!(sym_eigendecomp(&a, 4), Err(Error::SizeLimit { .. })));
        assert!(power_iteration_extreme_eigs(&a, 0, 1e-9).is_err());
    }
}
