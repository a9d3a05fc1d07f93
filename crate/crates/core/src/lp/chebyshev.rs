use serde::{Deserialize, Serialize};

use super::projection::project_simplex_into;
use super::simplex::{self, Constraint, LinearProgram, Relation};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{ops, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    ExactLP,
    ProjectedFallback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LpConfig {
    /// When false the exact LP is skipped and the projected solve is used.
    pub exact: bool,
    pub max_pivots: usize,
    pub fallback_tol: f64,
    pub fallback_max_iters: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self { exact: true, max_pivots: 50_000, fallback_tol: 1e-10, fallback_max_iters: 5000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevSolution {
    pub alpha: Vec<f64>,
    /// `‖Aα − b‖_∞` at the returned weights.
    pub t: f64,
    pub backend: Backend,
    pub iterations: usize,
    pub converged: bool,
}

fn residual_inf(a: &DenseMatrix, alpha: &[f64], b: &[f64]) -> f64 {
    ops::norm_inf(&ops::sub(&a.matvec(alpha), b))
}

fn check_groups(r: usize, groups: &[usize]) -> Result<()> {
    if groups.is_empty() || groups.contains(&0) {
        return Err(Error::InvalidInput("every simplex group needs at least one column".into()));
    }
    check_dim(r, groups.iter().sum())
}

/// Clamps tiny negatives and renormalizes each group to sum one.
fn clean_groups(alpha: &mut [f64], groups: &[usize]) {
    let mut start = 0;
    for &len in groups {
        let g = &mut alpha[start..start + len];
        g.iter_mut().for_each(|v| *v = v.max(0.0));
        let s: f64 = g.iter().sum();
        if s > 0.0 {
            g.iter_mut().for_each(|v| *v /= s);
        } else {
            g.iter_mut().for_each(|v| *v = 1.0 / len as f64);
        }
        start += len;
    }
}

/// `min t  s.t. −t ≤ Aα − b ≤ t,  α ∈ Δ`.
pub fn solve_chebyshev(a: &DenseMatrix, b: &[f64], cfg: &LpConfig) -> Result<ChebyshevSolution> {
    solve_block_chebyshev(a, b, &[a.cols()], cfg)
}

/// Chebyshev LP over a product of simplices; `groups` lists consecutive column
/// counts, each carrying its own simplex constraint.
pub fn solve_block_chebyshev(
    a: &DenseMatrix,
    b: &[f64],
    groups: &[usize],
    cfg: &LpConfig,
) -> Result<ChebyshevSolution> {
    let (m, r) = (a.rows(), a.cols());
    check_dim(m, b.len())?;
    if m == 0 {
        return Err(Error::InvalidInput("Chebyshev LP needs at least one row".into()));
    }
    check_groups(r, groups)?;
    if groups.len() == 1 && r == 1 {
        let alpha = vec![1.0];
        let t = residual_inf(a, &alpha, b);
        return Ok(ChebyshevSolution { alpha, t, backend: Backend::ExactLP, iterations: 0, converged: true });
    }
    // All columns equal within each group: every feasible α gives the same
    // residual, so return the uniform weights.
    let tol = 1e-14 * (1.0 + a.max_abs());
    let mut start = 0;
    let degenerate = groups.iter().all(|&len| {
        let first = a.column(start);
        let same = (start + 1..start + len).all(|j| ops::max_abs_diff(&first, &a.column(j)) <= tol);
        start += len;
        same
    });
    if degenerate {
        let mut alpha = vec![0.0; r];
        clean_groups(&mut alpha, groups);
        let t = residual_inf(a, &alpha, b);
        return Ok(ChebyshevSolution { alpha, t, backend: Backend::ExactLP, iterations: 0, converged: true });
    }
    if cfg.exact {
        if let Ok(sol) = exact_lp(a, b, groups, cfg.max_pivots) {
            return Ok(sol);
        }
    }
    solve_grouped_least_squares(a, b, groups, cfg.fallback_tol, cfg.fallback_max_iters)
}

fn exact_lp(a: &DenseMatrix, b: &[f64], groups: &[usize], max_pivots: usize) -> Result<ChebyshevSolution> {
    let (m, r) = (a.rows(), a.cols());
    let mut objective = vec![0.0; r + 1];
    objective[r] = 1.0;
    let mut constraints = Vec::with_capacity(2 * m + groups.len());
    for i in 0..m {
        let row = a.row(i);
        let mut up: Vec<f64> = row.to_vec();
        up.push(-1.0);
        constraints.push(Constraint { coeffs: up, relation: Relation::Le, rhs: b[i] });
        let mut lo: Vec<f64> = row.iter().map(|v| -v).collect();
        lo.push(-1.0);
        constraints.push(Constraint { coeffs: lo, relation: Relation::Le, rhs: -b[i] });
    }
    let mut start = 0;
    for &len in groups {
        let mut c = vec![0.0; r + 1];
        c[start..start + len].iter_mut().for_each(|v| *v = 1.0);
        constraints.push(Constraint { coeffs: c, relation: Relation::Eq, rhs: 1.0 });
        start += len;
    }
    let sol = simplex::solve(&LinearProgram { objective, constraints }, max_pivots)?;
    let mut alpha = sol.x[..r].to_vec();
    clean_groups(&mut alpha, groups);
    let t = residual_inf(a, &alpha, b);
    if !t.is_finite() || t > sol.x[r] + 1e-7 * (1.0 + sol.x[r].abs()) {
        return Err(Error::InvalidInput("LP solution failed verification".into()));
    }
    Ok(ChebyshevSolution {
        alpha,
        t,
        backend: Backend::ExactLP,
        iterations: sol.pivots,
        converged: true,
    })
}

/// Projected-gradient least squares `min ‖Aα − b‖₂` over the simplex.
pub fn solve_simplex_least_squares(
    a: &DenseMatrix,
    b: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<ChebyshevSolution> {
    solve_grouped_least_squares(a, b, &[a.cols()], tol, max_iters)
}

fn project_groups(alpha: &mut [f64], groups: &[usize]) {
    let mut start = 0;
    for &len in groups {
        project_simplex_into(&mut alpha[start..start + len]);
        start += len;
    }
}

/// Largest eigenvalue of `AᵀA` by power iteration.
fn gram_lambda_max(a: &DenseMatrix) -> f64 {
    let r = a.cols();
    let mut v: Vec<f64> = (0..r).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
    let nv = ops::norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut est = 0.0;
    for _ in 0..1000 {
        let w = a.matvec_t(&a.matvec(&v));
        let nw = ops::norm2(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let prev = est;
        est = nw;
        v = w.into_iter().map(|x| x / nw).collect();
        if (est - prev).abs() <= 1e-10 * est {
            break;
        }
    }
    est * 1.01
}

/// Accelerated projected gradient over a product of simplices. Stops when the
/// projected-gradient fixed-point residual is at most `tol`.
pub fn solve_grouped_least_squares(
    a: &DenseMatrix,
    b: &[f64],
    groups: &[usize],
    tol: f64,
    max_iters: usize,
) -> Result<ChebyshevSolution> {
    let r = a.cols();
    check_dim(a.rows(), b.len())?;
    check_groups(r, groups)?;
    let mut alpha = vec![0.0; r];
    clean_groups(&mut alpha, groups);
    let lip = gram_lambda_max(a);
    let obj = |al: &[f64]| 0.5 * ops::norm2_sq(&ops::sub(&a.matvec(al), b));
    let grad = |al: &[f64]| a.matvec_t(&ops::sub(&a.matvec(al), b));
    if lip == 0.0 {
        let t = residual_inf(a, &alpha, b);
        return Ok(ChebyshevSolution { alpha, t, backend: Backend::ProjectedFallback, iterations: 0, converged: true });
    }
    let step = 1.0 / lip;
    let mut y = alpha.clone();
    let mut theta = 1.0f64;
    let mut f_alpha = obj(&alpha);
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..max_iters {
        iterations = it + 1;
        let gy = grad(&y);
        let mut next: Vec<f64> = y.iter().zip(&gy).map(|(v, g)| v - step * g).collect();
        project_groups(&mut next, groups);
        let f_next = obj(&next);
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        if f_next > f_alpha {
            // Restart momentum from the current iterate.
            y = alpha.clone();
            theta = 1.0;
            continue;
        }
        let beta = (theta - 1.0) / theta_next;
        y = next.iter().zip(&alpha).map(|(n, o)| n + beta * (n - o)).collect();
        alpha = next;
        f_alpha = f_next;
        theta = theta_next;
        let ga = grad(&alpha);
        let mut pg: Vec<f64> = alpha.iter().zip(&ga).map(|(v, g)| v - step * g).collect();
        project_groups(&mut pg, groups);
        if ops::dist2(&pg, &alpha) <= tol {
            converged = true;
            break;
        }
    }
    clean_groups(&mut alpha, groups);
    let t = residual_inf(a, &alpha, b);
    Ok(ChebyshevSolution { alpha, t, backend: Backend::ProjectedFallback, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols(rows: usize, c: &[Vec<f64>]) -> DenseMatrix {
        DenseMatrix::from_columns(rows, c).unwrap()
    }

    #[test]
    fn singleton_and_exact_column() {
        let a = cols(2, &[vec![1.0, -2.0]]);
        let s = solve_chebyshev(&a, &[0.0, 0.0], &LpConfig::default()).unwrap();
        assert_eq!(s.alpha, vec![1.0]);
        assert_eq!(s.t, 2.0);
        let a = cols(2, &[vec![1.0, 0.0], vec![0.0, 1.0], vec![3.0, 3.0]]);
        let s = solve_chebyshev(&a, &[0.0, 1.0], &LpConfig::default()).unwrap();
        assert!(s.t <= 1e-12);
        assert!((s.alpha[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_column_example() {
        let a = cols(2, &[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]]);
        let s = solve_chebyshev(&a, &[2.0, 2.0], &LpConfig::default()).unwrap();
        assert!((s.t - 1.0).abs() < 1e-12);
        assert!(s.alpha[0].abs() < 1e-12 && (s.alpha[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_columns_give_uniform_weights() {
        let a = cols(1, &[vec![1.0], vec![1.0], vec![1.0]]);
        let s = solve_chebyshev(&a, &[0.0], &LpConfig::default()).unwrap();
        assert_eq!(s.alpha, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn least_squares_midpoint() {
        let a = cols(1, &[vec![1.0], vec![3.0]]);
        let s = solve_simplex_least_squares(&a, &[2.0], 1e-12, 5000).unwrap();
        assert!((s.alpha[0] - 0.5).abs() < 1e-9 && s.t < 1e-9);
    }
}
