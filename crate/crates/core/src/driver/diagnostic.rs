use serde::{Deserialize, Serialize};

use super::{ResidualKind, RunHistory};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstIterateReport {
    /// Per iteration: whether `R_d(x^k) ≤ max{τ_k/(1−η), C_η‖s_k‖ + (1+η)/(1−η)·‖e_k‖}`
    /// with `e_k` the recorded subproblem error;
    /// `None` where only a residual lower bound was recorded.
    pub per_iteration: Vec<Option<bool>>,
    pub checked: usize,
    pub violations: usize,
    /// `min_{k≤N} ‖s_k‖` against `√(2(Δ₀+E_N)/(μ(N+1)))` at the last index.
    pub min_step: f64,
    pub ergodic_bound: f64,
    pub ergodic_ok: bool,
    /// Tail bound over `{⌊N/2⌋, …, N}` for every `N`.
    pub tail_violations: usize,
    pub c_eta: f64,
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-9 * (1.0 + rhs.abs())
}

/// Checks the worst-iterate residual bound and the ergodic step bounds on a
/// recorded history. `f_inf` defaults to the smallest recorded objective.
pub fn worst_iterate_diagnostic(
    h: &RunHistory,
    eta: f64,
    l_g: f64,
    sigma: f64,
    mu: f64,
    f_inf: Option<f64>,
) -> WorstIterateReport {
    let c_eta = (1.0 + eta) * (l_g + sigma) / (1.0 - eta);
    let e_scale = (1.0 + eta) / (1.0 - eta);
    let rhs = |tau: f64, step: f64, err: f64| (tau / (1.0 - eta)).max(c_eta * step + e_scale * err);
    let per_iteration: Vec<Option<bool>> = h
        .records
        .iter()
        .map(|r| {
            (r.r_exact_kind == ResidualKind::Exact).then(|| within(r.r_exact, rhs(r.tau_k, r.step_norm, r.sub_error)))
        })
        .collect();
    let checked = per_iteration.iter().flatten().count();
    let violations = per_iteration.iter().flatten().filter(|ok| !**ok).count();

    let f_inf = f_inf.unwrap_or_else(|| {
        h.records.iter().map(|r| r.next_objective).fold(h.final_objective, f64::min)
    });
    let f0 = h.records.first().map_or(h.final_objective, |r| r.objective);
    let delta0 = (f0 - f_inf).max(0.0);

    let mut e_n = 0.0;
    let mut min_step = f64::INFINITY;
    let mut ergodic_bound = 0.0;
    let mut ergodic_ok = true;
    let mut tail_violations = 0;
    for (nn, r) in h.records.iter().enumerate() {
        e_n += r.slack;
        min_step = min_step.min(r.step_norm);
        ergodic_bound = (2.0 * (delta0 + e_n) / (mu * (nn + 1) as f64)).sqrt();
        ergodic_ok &= within(min_step, ergodic_bound);

        let lo = nn / 2;
        let tail = &h.records[lo..=nn];
        if tail.iter().all(|t| t.r_exact_kind == ResidualKind::Exact) {
            let best = tail.iter().map(|t| t.r_exact).fold(f64::INFINITY, f64::min);
            let tau_max = tail.iter().map(|t| t.tau_k).fold(0.0, f64::max);
            let bound = (tau_max / (1.0 - eta)).max(c_eta * (4.0 * (delta0 + e_n) / (mu * (nn + 1) as f64)).sqrt());
            if !within(best, bound) {
                tail_violations += 1;
            }
        }
    }
    if h.records.is_empty() {
        min_step = 0.0;
    }
    WorstIterateReport {
        per_iteration,
        checked,
        violations,
        min_step,
        ergodic_bound,
        ergodic_ok,
        tail_violations,
        c_eta,
    }
}
