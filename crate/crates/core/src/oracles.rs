//! Brute-force reference solutions used to validate the solver pieces.

use crate::error::{check_dim, Error, Result};
use crate::numerics::{ops, DenseMatrix, DenseSymmetricMatrix};

pub const QUBO_ENUMERATION_MAX_N: usize = 22;

/// Exact `min zᵀQz` over `{0,1}ⁿ`, scanning in Gray-code order with `O(n)`
/// updates per flip. Ties keep the first point visited.
pub fn oracle_enumerate_qubo(q: &DenseSymmetricMatrix) -> Result<(Vec<u8>, f64)> {
    let n = q.n();
    if n > QUBO_ENUMERATION_MAX_N {
        return Err(Error::SizeLimit { size: n, limit: QUBO_ENUMERATION_MAX_N });
    }
    let mut z = vec![0u8; n];
    // field[i] = Σ_{j≠i} Q_ij z_j
    let mut field = vec![0.0; n];
    let mut value = 0.0;
    let mut best = (z.clone(), 0.0);
    for step in 1u64..(1u64 << n) {
        let i = step.trailing_zeros() as usize;
        let delta = q.get(i, i) + 2.0 * field[i];
        if z[i] == 0 {
            z[i] = 1;
            value += delta;
            for (j, f) in field.iter_mut().enumerate() {
                if j != i {
                    *f += q.get(i, j);
                }
            }
        } else {
            z[i] = 0;
            value -= delta;
            for (j, f) in field.iter_mut().enumerate() {
                if j != i {
                    *f -= q.get(i, j);
                }
            }
        }
        if value < best.1 {
            best = (z.clone(), value);
        }
    }
    // Recompute from scratch so accumulated rounding never leaks out.
    let exact = naive_qubo_value(q, &best.0);
    Ok((best.0, exact))
}

/// `Σ_i Σ_j Q_ij z_i z_j` with plain loops.
pub fn naive_qubo_value(q: &DenseSymmetricMatrix, z: &[u8]) -> f64 {
    let n = q.n();
    let mut s = 0.0;
    for i in 0..n {
        if z[i] == 0 {
            continue;
        }
        for j in 0..n {
            if z[j] != 0 {
                s += q.get(i, j);
            }
        }
    }
    s
}

/// Exhaustive minimum by the naive evaluator, for cross-checking.
pub fn naive_enumerate_qubo(q: &DenseSymmetricMatrix) -> Result<(Vec<u8>, f64)> {
    let n = q.n();
    if n > 16 {
        return Err(Error::SizeLimit { size: n, limit: 16 });
    }
    let mut best = (vec![0u8; n], 0.0);
    for mask in 0u64..(1u64 << n) {
        let z: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
        let v = naive_qubo_value(q, &z);
        if v < best.1 {
            best = (z, v);
        }
    }
    Ok(best)
}

pub const CHEBYSHEV_ORACLE_MAX_R: usize = 4;

fn cheb_value(a: &DenseMatrix, b: &[f64], alpha: &[f64]) -> f64 {
    ops::norm_inf(&ops::sub(&a.matvec(alpha), b))
}

/// Calls `f` on every point of the simplex grid with spacing `1/steps`.
fn for_each_grid_point(r: usize, steps: usize, f: &mut impl FnMut(&[f64])) {
    fn rec(k: usize, left: usize, steps: usize, cur: &mut Vec<f64>, f: &mut impl FnMut(&[f64])) {
        if k + 1 == cur.len() {
            cur[k] = left as f64 / steps as f64;
            f(cur);
            return;
        }
        for c in 0..=left {
            cur[k] = c as f64 / steps as f64;
            rec(k + 1, left - c, steps, cur, f);
        }
    }
    let mut cur = vec![0.0; r];
    rec(0, steps, steps, &mut cur, f);
}

/// `min_{α∈Δ} ‖Aα − b‖_∞` over the simplex grid with spacing `grid_step`,
/// returned with the attaining weights. The value is within
/// `‖A‖_{1→∞} · grid_step` of the optimum.
pub fn oracle_chebyshev(a: &DenseMatrix, b: &[f64], grid_step: f64) -> Result<(f64, Vec<f64>)> {
    let r = a.cols();
    check_dim(a.rows(), b.len())?;
    if r == 0 || r > CHEBYSHEV_ORACLE_MAX_R {
        return Err(Error::SizeLimit { size: r, limit: CHEBYSHEV_ORACLE_MAX_R });
    }
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidInput(format!("grid step must lie in (0, 1], got {grid_step}")));
    }
    let steps = (1.0 / grid_step).round().max(1.0) as usize;
    let mut best = (f64::INFINITY, vec![0.0; r]);
    for_each_grid_point(r, steps, &mut |al| {
        let t = cheb_value(a, b, al);
        if t < best.0 {
            best = (t, al.to_vec());
        }
    });
    Ok(best)
}

/// Grid search followed by repeated local grids of halving spacing around the
/// incumbent. Every returned value is attained by a feasible point, so it is an
/// upper bound on the optimum; in practice it matches it to ~1e−6.
pub fn oracle_chebyshev_zoomed(a: &DenseMatrix, b: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (mut t, mut alpha) = oracle_chebyshev(a, b, 1.0 / 40.0)?;
    let r = alpha.len();
    if r == 1 {
        return Ok((t, alpha));
    }
    let half = 4i64;
    let mut h = 1.0 / 40.0;
    for _ in 0..40 {
        h *= 0.5;
        let mut improved = true;
        while improved {
            improved = false;
            let mut offs = vec![-half; r - 1];
            loop {
                let sum: i64 = offs.iter().sum();
                let mut cand: Vec<f64> = alpha.clone();
                for k in 0..r - 1 {
                    cand[k] += h * offs[k] as f64;
                }
                cand[r - 1] -= h * sum as f64;
                if cand.iter().all(|v| *v >= 0.0) {
                    let tv = cheb_value(a, b, &cand);
                    if tv < t - 1e-15 {
                        t = tv;
                        alpha = cand;
                        improved = true;
                    }
                }
                let mut k = 0;
                while k < r - 1 {
                    offs[k] += 1;
                    if offs[k] <= half {
                        break;
                    }
                    offs[k] = -half;
                    k += 1;
                }
                if k == r - 1 {
                    break;
                }
            }
        }
    }
    Ok((t, alpha))
}

pub const CHEBYSHEV_VERTEX_MAX_M: usize = 8;
pub const CHEBYSHEV_VERTEX_MAX_R: usize = 8;

/// Exact `min_{α∈Δ} ‖Aα − b‖_∞` by enumerating the basic solutions of the
/// LP in `(α, t)`: every choice of `r` tight inequalities together with
/// `Σα = 1` is solved directly and the best feasible one is kept.
pub fn oracle_chebyshev_vertices(a: &DenseMatrix, b: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (m, r) = (a.rows(), a.cols());
    check_dim(m, b.len())?;
    if r == 0 || r > CHEBYSHEV_VERTEX_MAX_R {
        return Err(Error::SizeLimit { size: r, limit: CHEBYSHEV_VERTEX_MAX_R });
    }
    if m > CHEBYSHEV_VERTEX_MAX_M {
        return Err(Error::SizeLimit { size: m, limit: CHEBYSHEV_VERTEX_MAX_M });
    }
    // Inequalities c·(α, t) ≤ d: the two sides of each row, then α_j ≥ 0.
    let mut ineq: Vec<(Vec<f64>, f64)> = Vec::with_capacity(2 * m + r);
    for i in 0..m {
        let row = a.row(i);
        let mut up: Vec<f64> = row.to_vec();
        up.push(-1.0);
        let mut lo: Vec<f64> = row.iter().map(|v| -v).collect();
        lo.push(-1.0);
        ineq.push((up, b[i]));
        ineq.push((lo, -b[i]));
    }
    for j in 0..r {
        let mut c = vec![0.0; r + 1];
        c[j] = -1.0;
        ineq.push((c, 0.0));
    }
    let mut eq = vec![1.0; r + 1];
    eq[r] = 0.0;
    let scale = 1.0 + a.max_abs() + ops::norm_inf(b);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut pick: Vec<usize> = (0..r).collect();
    loop {
        let mut rows = vec![eq.clone()];
        let mut rhs = vec![1.0];
        for &k in &pick {
            rows.push(ineq[k].0.clone());
            rhs.push(ineq[k].1);
        }
        if let Some(u) = solve_square(rows, rhs) {
            let feasible = ineq.iter().all(|(c, d)| ops::dot(c, &u) <= d + 1e-9 * scale);
            if feasible && best.as_ref().is_none_or(|(t, _)| u[r] < *t) {
                best = Some((u[r], u[..r].to_vec()));
            }
        }
        // next r-subset of the inequalities in lexicographic order
        let total = ineq.len();
        let mut i = r;
        while i > 0 && pick[i - 1] == total - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        pick[i - 1] += 1;
        for j in i..r {
            pick[j] = pick[j - 1] + 1;
        }
    }
    let (_, alpha) = best.ok_or_else(|| Error::InvalidInput("no feasible basic solution".into()))?;
    Ok((cheb_value(a, b, &alpha), alpha))
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut y: Vec<f64>) -> Option<Vec<f64>> {
    let n = y.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        y.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            if f != 0.0 {
                for j in c..n {
                    a[i][j] -= f * a[c][j];
                }
                y[i] -= f * y[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (y[i] - s) / a[i][i];
    }
    Some(x)
}

/// One summand of an aggregate for [`oracle_best_aggregate`].
#[derive(Clone, Debug)]
pub enum AggregateBlock {
    /// Pick exactly one of the (already weighted) vectors.
    Explicit(Vec<Vec<f64>>),
    /// Pick `k` distinct rows, each with a sign in `{−1, +1}`, and add them
    /// scaled by `weight`.
    SignedSubset { rows: Vec<Vec<f64>>, k: usize, weight: f64 },
}

impl AggregateBlock {
    fn count(&self) -> u128 {
        match self {
            AggregateBlock::Explicit(v) => v.len() as u128,
            AggregateBlock::SignedSubset { rows, k, .. } => binom(rows.len(), *k).saturating_mul(1u128 << *k),
        }
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

/// `max ‖z − Σ_l v_l‖` over every aggregate, with the maximizing aggregate.
pub fn oracle_best_aggregate(blocks: &[AggregateBlock], z: &[f64], cap: u128) -> Result<(f64, Vec<f64>)> {
    let n = z.len();
    let mut count: u128 = 1;
    for b in blocks {
        count = count.saturating_mul(b.count());
    }
    if count > cap {
        return Err(Error::EnumerationCap { count, cap });
    }
    if count == 0 {
        return Err(Error::InvalidInput("some block has no admissible choice".into()));
    }
    let mut options: Vec<Vec<Vec<f64>>> = Vec::with_capacity(blocks.len());
    for b in blocks {
        options.push(match b {
            AggregateBlock::Explicit(v) => {
                for c in v {
                    check_dim(n, c.len())?;
                }
                v.clone()
            }
            AggregateBlock::SignedSubset { rows, k, weight } => signed_subsets(rows, *k, *weight, n)?,
        });
    }
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let mut acc = vec![0.0; n];
    nest(&options, 0, &mut acc, z, &mut best);
    Ok(best)
}

fn signed_subsets(rows: &[Vec<f64>], k: usize, w: f64, n: usize) -> Result<Vec<Vec<f64>>> {
    for r in rows {
        check_dim(n, r.len())?;
    }
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(k);
    fn choose(rows: &[Vec<f64>], k: usize, from: usize, pick: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pick.len() == k {
            out.push(pick.clone());
            return;
        }
        for i in from..rows.len() {
            pick.push(i);
            choose(rows, k, i + 1, pick, out);
            pick.pop();
        }
    }
    let mut subsets = Vec::new();
    choose(rows, k, 0, &mut pick, &mut subsets);
    for s in subsets {
        for mask in 0u64..(1u64 << k) {
            let mut v = vec![0.0; n];
            for (bit, &i) in s.iter().enumerate() {
                let sign = if (mask >> bit) & 1 == 1 { -1.0 } else { 1.0 };
                ops::axpy(sign * w, &rows[i], &mut v);
            }
            out.push(v);
        }
    }
    Ok(out)
}

fn nest(options: &[Vec<Vec<f64>>], l: usize, acc: &mut [f64], z: &[f64], best: &mut (f64, Vec<f64>)) {
    if l == options.len() {
        let r = ops::norm2(&ops::sub(z, acc));
        if r > best.0 {
            *best = (r, acc.to_vec());
        }
        return;
    }
    for v in &options[l] {
        ops::axpy(1.0, v, acc);
        nest(options, l + 1, acc, z, best);
        ops::axpy(-1.0, v, acc);
    }
}
