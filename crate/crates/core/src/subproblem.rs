//! Proximal DCA subproblem `min g(y) − vᵀy + (σ/2)‖y − x‖²`, optionally over a box.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::model::{Bounds, ConvexKind, ConvexPart, DcProgram};
use crate::numerics::{ops, power_iteration_extreme_eigs, DenseSymmetricMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProxConfig {
    /// `None` picks 0 when g is strongly convex and 1 otherwise.
    pub sigma: Option<f64>,
    pub qp_tol: f64,
    pub qp_max_iters: usize,
    pub polish: bool,
    /// Relative inexactness allowed for unconverged steps.
    pub kappa: f64,
}

impl Default for ProxConfig {
    fn default() -> Self {
        Self { sigma: None, qp_tol: 1e-9, qp_max_iters: 10_000, polish: true, kappa: 0.1 }
    }
}

impl ProxConfig {
    pub fn effective_sigma(&self, g: &ConvexPart) -> f64 {
        self.sigma.unwrap_or(if g.strong_convexity() > 0.0 { 0.0 } else { 1.0 })
    }

    /// Strong convexity of the subproblem.
    pub fn mu(&self, g: &ConvexPart) -> f64 {
        g.strong_convexity() + self.effective_sigma(g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxResult {
    pub x: Vec<f64>,
    /// Gradient norm (no box) or box KKT violation in max norm.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxQpResult {
    pub x: Vec<f64>,
    pub kkt_residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub fn prox_step(p: &DcProgram, x: &[f64], v: &[f64], cfg: &ProxConfig) -> Result<ProxResult> {
    p.check_point(x)?;
    check_dim(p.dim(), v.len())?;
    let g = p.g();
    let sigma = cfg.effective_sigma(g);
    if !(sigma >= 0.0) || !(cfg.mu(g) > 0.0) {
        return Err(Error::InvalidInput(format!(
            "subproblem needs strong convexity, got sigma {sigma} with g strongly convex modulus {}",
            g.strong_convexity()
        )));
    }
    let n = p.dim();
    // The subproblem is ½yᵀ(H + σI)y + qᵀy with q = ∇g(0) − v − σx.
    let mut q = g.gradient(&vec![0.0; n]);
    ops::axpy(-1.0, v, &mut q);
    ops::axpy(-sigma, x, &mut q);
    let op = |d: &[f64]| {
        let mut out = g.hess_vec(d);
        ops::axpy(sigma, d, &mut out);
        out
    };

    if let ConvexKind::ScaledIdentity { c } = g.kind() {
        let mut y = ops::scale(-1.0 / (c + sigma), &q);
        p.project(&mut y);
        let grad = ops::add(&op(&y), &q);
        let residual = match p.bounds() {
            Some(b) => kkt_violation(b, &y, &grad),
            None => ops::norm2(&grad),
        };
        return Ok(ProxResult { x: y, residual, converged: true, iterations: 0 });
    }

    match p.bounds() {
        None => {
            let tol = cfg.qp_tol * (1.0 + ops::norm2(v));
            let rhs = ops::scale(-1.0, &q);
            let (y, res, it) = conjugate_gradient(&op, &rhs, x, tol, cfg.qp_max_iters.max(1));
            Ok(ProxResult { x: y, residual: res, converged: res <= tol, iterations: it })
        }
        Some(b) => {
            let lip = g.lipschitz() + sigma;
            let r = box_qp_operator(&op, &q, b, x, lip, cfg.qp_tol, cfg.qp_max_iters, cfg.polish);
            Ok(ProxResult { x: r.x, residual: r.kkt_residual, converged: r.converged, iterations: r.iterations })
        }
    }
}

/// `min ½xᵀHx + fᵀx` over `bounds`.
pub fn solve_box_qp(
    h: &DenseSymmetricMatrix,
    f: &[f64],
    bounds: &Bounds,
    tol: f64,
    max_iters: usize,
) -> Result<BoxQpResult> {
    let n = h.n();
    check_dim(n, f.len())?;
    check_dim(n, bounds.lower.len())?;
    check_dim(n, bounds.upper.len())?;
    if !ops::all_finite(f) {
        return Err(Error::InvalidInput("non-finite linear term".into()));
    }
    if bounds.lower.iter().zip(&bounds.upper).any(|(l, u)| !(l <= u)) {
        return Err(Error::InvalidInput("box lower bound exceeds upper bound".into()));
    }
    let (lmax, _) = power_iteration_extreme_eigs(h, 2000, 1e-9)?;
    let lip = if lmax > 0.0 { lmax * (1.0 + 1e-6) } else { 1.0 };
    let x0: Vec<f64> = (0..n)
        .map(|i| {
            let (l, u) = (bounds.lower[i], bounds.upper[i]);
            match (l.is_finite(), u.is_finite()) {
                (true, true) => 0.5 * (l + u),
                (true, false) => l,
                (false, true) => u,
                _ => 0.0,
            }
        })
        .collect();
    Ok(box_qp_operator(&|d: &[f64]| h.matvec(d), f, bounds, &x0, lip, tol, max_iters, true))
}

/// Box KKT violation of gradient `grad` at `x` in max norm.
pub fn kkt_violation(b: &Bounds, x: &[f64], grad: &[f64]) -> f64 {
    (0..x.len()).map(|i| b.face(i, x[i], grad[i]).abs()).fold(0.0, f64::max)
}

pub fn descent_check(f_prev: f64, f_next: f64, step_norm: f64, eps_k: f64, mu: f64) -> bool {
    f_next <= f_prev + eps_k - 0.5 * mu * step_norm * step_norm + 1e-9 * (1.0 + f_prev.abs())
}

fn clip(b: &Bounds, x: &mut [f64]) {
    ops::clip_box(x, &b.lower, &b.upper);
}

/// Solves `A y = rhs` from `x0`; returns the iterate, `‖A y − rhs‖` and the iteration count.
fn conjugate_gradient(
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    x0: &[f64],
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, f64, usize) {
    let mut y = x0.to_vec();
    let mut r = ops::sub(rhs, &op(&y));
    let mut rr = ops::norm2_sq(&r);
    if rr.sqrt() <= tol {
        return (y, rr.sqrt(), 0);
    }
    let mut d = r.clone();
    for it in 1..=max_iters {
        let ad = op(&d);
        let dad = ops::dot(&d, &ad);
        if !(dad > 0.0) {
            return (y, rr.sqrt(), it);
        }
        let a = rr / dad;
        ops::axpy(a, &d, &mut y);
        ops::axpy(-a, &ad, &mut r);
        let rr_new = ops::norm2_sq(&r);
        if it % 50 == 0 {
            r = ops::sub(rhs, &op(&y));
        }
        if rr_new.sqrt() <= tol {
            let true_res = ops::norm2(&ops::sub(rhs, &op(&y)));
            if true_res <= tol {
                return (y, true_res, it);
            }
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (di, ri) in d.iter_mut().zip(&r) {
            *di = ri + beta * *di;
        }
    }
    let res = ops::norm2(&ops::sub(rhs, &op(&y)));
    (y, res, max_iters)
}

/// Accelerated projected gradient on `½yᵀAy + qᵀy` with restart and an active-set polish.
#[allow(clippy::too_many_arguments)]
fn box_qp_operator(
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    q: &[f64],
    b: &Bounds,
    x0: &[f64],
    lip: f64,
    tol: f64,
    max_iters: usize,
    polish: bool,
) -> BoxQpResult {
    let objective = |y: &[f64], grad: &[f64]| 0.5 * (ops::dot(y, grad) + ops::dot(y, q));
    let gradient = |y: &[f64]| ops::add(&op(y), q);

    let mut x = x0.to_vec();
    clip(b, &mut x);
    let mut gx = gradient(&x);
    let mut fx = objective(&x, &gx);
    let mut kkt = kkt_violation(b, &x, &gx);
    if kkt <= tol {
        return BoxQpResult { x, kkt_residual: kkt, converged: true, iterations: 0 };
    }
    let step = 1.0 / lip;
    let mut x_prev: Vec<f64>;
    let mut g_prev: Vec<f64>;
    let mut t = 1.0_f64;
    let mut y = x.clone();
    let mut gy = gx.clone();

    for it in 1..=max_iters {
        let mut xn: Vec<f64> = y.iter().zip(&gy).map(|(yi, gi)| yi - step * gi).collect();
        clip(b, &mut xn);
        let gn = gradient(&xn);
        let fn_ = objective(&xn, &gn);
        x_prev = std::mem::replace(&mut x, xn);
        g_prev = std::mem::replace(&mut gx, gn);
        let restarted = fn_ > fx;
        fx = fn_;
        kkt = kkt_violation(b, &x, &gx);
        if kkt <= tol {
            return BoxQpResult { x, kkt_residual: kkt, converged: true, iterations: it };
        }
        if polish && it % 50 == 0 {
            if let Some((xp, gp, fp)) = polish_step(op, q, b, &x, &gx, fx, tol, max_iters) {
                x = xp;
                gx = gp;
                fx = fp;
                kkt = kkt_violation(b, &x, &gx);
                if kkt <= tol {
                    return BoxQpResult { x, kkt_residual: kkt, converged: true, iterations: it };
                }
                t = 1.0;
            }
        }
        if restarted {
            t = 1.0;
            y = x.clone();
            gy = gx.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        t = t_next;
        // ∇ is affine, so the gradient at the extrapolated point is the same combination.
        y = x.iter().zip(&x_prev).map(|(a, p)| a + beta * (a - p)).collect();
        gy = gx.iter().zip(&g_prev).map(|(a, p)| a + beta * (a - p)).collect();
    }
    if polish {
        if let Some((xp, gp, _)) = polish_step(op, q, b, &x, &gx, fx, tol, max_iters) {
            let k = kkt_violation(b, &xp, &gp);
            if k < kkt {
                x = xp;
                kkt = k;
            }
        }
    }
    BoxQpResult { x, kkt_residual: kkt, converged: kkt <= tol, iterations: max_iters }
}

/// Fixes coordinates at a bound with a strict KKT sign, solves the free system
/// by CG, re-projects, and returns the point if the objective did not increase.
#[allow(clippy::too_many_arguments)]
fn polish_step(
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    q: &[f64],
    b: &Bounds,
    x: &[f64],
    grad: &[f64],
    fx: f64,
    tol: f64,
    max_iters: usize,
) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    const NEAR: f64 = 1e-9;
    let n = x.len();
    let mut fixed = vec![false; n];
    let mut base = x.to_vec();
    for i in 0..n {
        if x[i] - b.lower[i] <= NEAR && grad[i] > 0.0 {
            fixed[i] = true;
            base[i] = b.lower[i];
        } else if b.upper[i] - x[i] <= NEAR && grad[i] < 0.0 {
            fixed[i] = true;
            base[i] = b.upper[i];
        }
    }
    if fixed.iter().all(|f| *f) {
        let g = ops::add(&op(&base), q);
        let f = 0.5 * (ops::dot(&base, &g) + ops::dot(&base, q));
        return (f <= fx).then_some((base, g, f));
    }
    let masked = |d: &[f64]| {
        let mut dm = d.to_vec();
        for i in 0..n {
            if fixed[i] {
                dm[i] = 0.0;
            }
        }
        let mut out = op(&dm);
        for i in 0..n {
            if fixed[i] {
                out[i] = 0.0;
            }
        }
        out
    };
    let mut xb = base.clone();
    for i in 0..n {
        if !fixed[i] {
            xb[i] = 0.0;
        }
    }
    let ab = op(&xb);
    let rhs: Vec<f64> = (0..n).map(|i| if fixed[i] { 0.0 } else { -(q[i] + ab[i]) }).collect();
    let start: Vec<f64> = (0..n).map(|i| if fixed[i] { 0.0 } else { x[i] }).collect();
    let (free, _, _) = conjugate_gradient(&masked, &rhs, &start, 0.1 * tol, max_iters.min(10 * n + 50));
    let mut y: Vec<f64> = (0..n).map(|i| if fixed[i] { base[i] } else { free[i] }).collect();
    clip(b, &mut y);
    let gy = ops::add(&op(&y), q);
    let fy = 0.5 * (ops::dot(&y, &gy) + ops::dot(&y, q));
    (fy <= fx).then_some((y, gy, fy))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_box_qp_clips() {
        let h = DenseSymmetricMatrix::diagonal(&[2.0, 2.0]).unwrap();
        let r = solve_box_qp(&h, &[-3.0, -0.5], &Bounds::unit(2), 1e-9, 10_000).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-9 && (r.x[1] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn identity_with_zero_linear_is_origin() {
        let h = DenseSymmetricMatrix::identity(4).unwrap();
        let r = solve_box_qp(&h, &[0.0; 4], &Bounds::unit(4), 1e-9, 1000).unwrap();
        assert!(r.x.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn descent_check_cases() {
        assert!(descent_check(0.0, -0.5, 1.0, 0.0, 1.0));
        assert!(descent_check(1.0, 1.0, 0.0, 0.0, 1.0));
        assert!(!descent_check(0.0, 1.0, 1.0, 0.0, 1.0));
    }
}
