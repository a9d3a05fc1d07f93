//! The main loop, multistart and run histories.

mod config;
mod diagnostic;

pub use config::{EpsSchedule, Rule, SketchConfig, SketchSize, SolverConfig, TauSchedule};
pub use diagnostic::{worst_iterate_diagnostic, WorstIterateReport};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::Backend;
use crate::model::{BlockGradients, DcProgram};
use crate::numerics::ops;
use crate::rng::derive_seed;
use crate::rules::{self, AggregateMode, Branch, Geometry, SelectionDecision};
use crate::sketch::{draw_sketch, SketchMatrix};
use crate::stationarity::{enumerate_aggregates, vertex_scan, EXACT_TIE_TOL};
use crate::subproblem::{descent_check, prox_step};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIters,
    /// A subproblem missed its tolerance by more than the relative budget.
    Flagged,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualKind {
    Exact,
    /// Greedy aggregate value: a lower bound on the block residual.
    GreedyLowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchKind {
    Vertex,
    Combination,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub k: usize,
    /// `F(x^k)`
    pub objective: f64,
    /// `F(x^{k+1})`
    pub next_objective: f64,
    /// `‖x^{k+1} − x^k‖`
    pub step_norm: f64,
    pub r_hat: Option<f64>,
    /// Residual at `x^k` over the exactly active set.
    pub r_exact: f64,
    pub r_exact_kind: ResidualKind,
    /// Single-block residual over the `ε_k`-active set.
    pub r_eps: Option<f64>,
    pub branch: BranchKind,
    pub lp_called: bool,
    pub lp_backend: Option<Backend>,
    pub eps_k: f64,
    pub tau_k: f64,
    pub m_k: usize,
    /// Number of aggregate active vertices at `ε_k`.
    pub active_count: u128,
    pub slack: f64,
    pub descent_ok: bool,
    pub sub_iterations: usize,
    pub sub_residual: f64,
    pub sub_converged: bool,
    /// `‖π(∇g(x^{k+1}) − v^k + σ(x^{k+1} − x^k))‖`, the subproblem optimality error.
    pub sub_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunHistory {
    pub rule: Rule,
    pub start: usize,
    pub x0: Vec<f64>,
    pub records: Vec<IterRecord>,
    pub x_final: Vec<f64>,
    pub final_objective: f64,
    pub final_residual: f64,
    pub final_residual_kind: ResidualKind,
    pub status: Status,
    pub mu: f64,
    pub sigma: f64,
    pub rounded: Option<(Vec<u8>, f64)>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl RunHistory {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn lp_calls(&self) -> usize {
        self.records.iter().filter(|r| r.lp_called).count()
    }

    pub fn all_descent_ok(&self) -> bool {
        self.records.iter().all(|r| r.descent_ok)
    }

    /// Objective used to rank multistart runs.
    pub fn score(&self) -> f64 {
        self.rounded.as_ref().map_or(self.final_objective, |r| r.1)
    }
}

/// Residual at `x` over the exact active set: the vertex scan for single
/// explicit blocks, enumeration when the aggregate count fits `cap`, else the
/// greedy lower bound.
pub fn exact_residual(p: &DcProgram, x: &[f64], cap: u128) -> Result<(f64, ResidualKind)> {
    let active = p.active_set(x, EXACT_TIE_TOL)?;
    let grads = p.gradients_impl(x, &active, false)?;
    let g = p.grad_g(x)?;
    Ok(residual_from(p, x, &g, &grads, active.aggregate_count(), cap))
}

fn residual_from(
    p: &DcProgram,
    x: &[f64],
    g: &[f64],
    grads: &[BlockGradients<'_>],
    count: u128,
    cap: u128,
) -> (f64, ResidualKind) {
    if grads.len() == 1 && grads[0].is_explicit() {
        (vertex_scan(p, x, g, &grads[0]).0, ResidualKind::Exact)
    } else if count <= cap {
        (enumerate_aggregates(p, x, g, grads).0, ResidualKind::Exact)
    } else {
        let geo = Geometry { grad_g: g, x, bounds: p.bounds() };
        (rules::greedy(grads, &geo, None).score, ResidualKind::GreedyLowerBound)
    }
}

pub fn run(p: &DcProgram, x0: &[f64], cfg: &SolverConfig) -> Result<RunHistory> {
    run_indexed(p, x0, cfg, 0)
}

/// One run; `start` keys the random streams so multistart runs are independent.
pub fn run_indexed(p: &DcProgram, x0: &[f64], cfg: &SolverConfig, start: usize) -> Result<RunHistory> {
    cfg.validate()?;
    p.check_point(x0)?;
    if let Some(b) = p.bounds() {
        if !b.contains(x0) {
            return Err(Error::InvalidInput("starting point lies outside the box".into()));
        }
    }
    if cfg.rule.is_single_block() && !(p.blocks().len() == 1 && p.blocks()[0].is_explicit()) {
        return Err(Error::RuleMismatch { rule: cfg.rule.label(), blocks: p.blocks().len() });
    }
    let clock = Instant::now();
    let n = p.dim();
    let sigma = cfg.prox.effective_sigma(p.g());
    let mu = cfg.prox.mu(p.g());
    let mut x = x0.to_vec();
    let mut f = p.eval(&x)?;
    let mut records = Vec::new();
    let mut status = Status::MaxIters;
    let mut flagged = false;

    for k in 0..cfg.max_iters {
        let eps_k = cfg.eps.at(k);
        let tau_k = cfg.tau.at(k);
        let g = p.grad_g(&x)?;
        let active = p.active_set(&x, eps_k)?;
        let grads = p.gradients_impl(&x, &active, true)?;
        let count = active.aggregate_count();

        let (r_exact, r_kind) = if eps_k == 0.0 {
            residual_from(p, &x, &g, &grads, count, cfg.enumeration_cap)
        } else {
            exact_residual(p, &x, cfg.enumeration_cap)?
        };
        let r_eps = (grads.len() == 1 && grads[0].is_explicit()).then(|| vertex_scan(p, &x, &g, &grads[0]).0);

        let geo = Geometry { grad_g: &g, x: &x, bounds: p.bounds() };
        let (sketch, m_k) = if cfg.rule.uses_sketch() {
            let d = make_sketch(cfg, k, n, grads.iter().map(|b| b.candidates.len() as u128).sum(), start)?;
            let m = d.m();
            (Some(d), m)
        } else {
            (None, 0)
        };
        let rseed = derive_seed(cfg.seed, &[start as u64, k as u64, 1]);
        let dec = select(cfg, &grads, &geo, sketch.as_ref(), tau_k, rseed, n)?;

        let prox = prox_step(p, &x, &dec.v, &cfg.prox)?;
        let step = ops::dist2(&prox.x, &x);
        let f_next = p.eval(&prox.x)?;
        if !f_next.is_finite() || !ops::all_finite(&prox.x) {
            return Err(Error::Diverged(k));
        }
        let sub_error = {
            let mut w = p.grad_g(&prox.x)?;
            ops::axpy(-1.0, &dec.v, &mut w);
            for i in 0..n {
                w[i] += sigma * (prox.x[i] - x[i]);
            }
            p.box_face(&prox.x, &mut w);
            ops::norm2(&w)
        };
        let slack = p.descent_slack(&active);
        let descent_ok = descent_check(f, f_next, step, slack, mu);
        if !prox.converged && prox.residual > cfg.prox.kappa * step {
            flagged = true;
        }
        records.push(IterRecord {
            k,
            objective: f,
            next_objective: f_next,
            step_norm: step,
            r_hat: dec.r_hat,
            r_exact,
            r_exact_kind: r_kind,
            r_eps,
            branch: BranchKind::from(&dec.branch),
            lp_called: dec.lp_called,
            lp_backend: dec.lp.as_ref().map(|l| l.backend),
            eps_k,
            tau_k,
            m_k,
            active_count: count,
            slack,
            descent_ok,
            sub_iterations: prox.iterations,
            sub_residual: prox.residual,
            sub_converged: prox.converged,
            sub_error,
        });
        x = prox.x;
        f = f_next;
        let residual_ok = r_kind == ResidualKind::GreedyLowerBound || r_exact <= cfg.stop_residual_tol;
        if step <= cfg.stop_step_tol && residual_ok {
            status = Status::Converged;
            break;
        }
    }
    if flagged {
        status = Status::Flagged;
    }
    let (final_residual, final_residual_kind) = exact_residual(p, &x, cfg.enumeration_cap)?;
    let rounded = match p.qubo() {
        Some(_) => Some(p.round_binary(&x)?),
        None => None,
    };
    Ok(RunHistory {
        rule: cfg.rule,
        start,
        x0: x0.to_vec(),
        records,
        final_objective: f,
        x_final: x,
        final_residual,
        final_residual_kind,
        status,
        mu,
        sigma,
        rounded,
        wall_time_s: clock.elapsed().as_secs_f64(),
    })
}

fn make_sketch(cfg: &SolverConfig, k: usize, n: usize, active: u128, start: usize) -> Result<SketchMatrix> {
    if cfg.sketch.is_identity() {
        return Ok(SketchMatrix::identity(n));
    }
    let m = cfg.sketch.rows_at(k, n, active)?;
    draw_sketch(m, n, cfg.sketch.kind, derive_seed(cfg.sketch.base_seed, &[start as u64, k as u64]))
}

fn select(
    cfg: &SolverConfig,
    grads: &[BlockGradients<'_>],
    geo: &Geometry<'_>,
    d: Option<&SketchMatrix>,
    tau: f64,
    seed: u64,
    n: usize,
) -> Result<SelectionDecision> {
    let sketch = || d.ok_or_else(|| Error::Config("rule needs a sketch".into()));
    match cfg.rule {
        Rule::Centered => rules::centered_single(&grads[0], n),
        Rule::RandomVertex => rules::random_single(&grads[0], n, seed),
        Rule::FullVertex => rules::full_single(&grads[0], geo),
        Rule::Ra => rules::ra_single(&grads[0], geo, sketch()?, tau, &cfg.lp),
        Rule::BlockCentered => rules::select_block_aggregate(grads, geo, AggregateMode::Centered),
        Rule::BlockRandom => rules::select_block_aggregate(grads, geo, AggregateMode::Random(seed)),
        Rule::BlockGreedyFull => rules::select_block_aggregate(grads, geo, AggregateMode::GreedyFull),
        Rule::BlockGreedySketched => {
            rules::select_block_aggregate(grads, geo, AggregateMode::GreedySketched(sketch()?))
        }
        Rule::BlockRa => rules::select_block_ra(grads, geo, sketch()?, tau, &cfg.lp),
    }
}

/// Independent runs from every start, in parallel; returns the index of the
/// best run (by rounded objective when the program has one) and all runs.
pub fn multistart(p: &DcProgram, starts: &[Vec<f64>], cfg: &SolverConfig) -> Result<(usize, Vec<RunHistory>)> {
    if starts.is_empty() {
        return Err(Error::InvalidInput("multistart needs at least one start".into()));
    }
    let runs: Vec<RunHistory> = starts
        .par_iter()
        .enumerate()
        .map(|(i, x0)| run_indexed(p, x0, cfg, i))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.score() < runs[best].score() {
            best = i;
        }
    }
    Ok((best, runs))
}

impl From<&Branch> for BranchKind {
    fn from(b: &Branch) -> Self {
        if b.is_vertex() {
            BranchKind::Vertex
        } else {
            BranchKind::Combination
        }
    }
}
