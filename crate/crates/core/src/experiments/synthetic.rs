use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Deserialize;

use super::{budget_sketch, fixed_sketch, max, mean, min, status_label, Cell, RecipeContext, Table};
use crate::driver::{run, worst_iterate_diagnostic, EpsSchedule, Rule, SketchConfig, SketchSize, SolverConfig, TauSchedule};
use crate::error::Result;
use crate::instances::{
    gen_signed_pair_affine, gen_signed_pair_quadratic, near_active_diagnostic, one_d_trap, signed_pair_rows,
};
use crate::lp::{solve_chebyshev, LpConfig};
use crate::model::{BlockKind, Column, ConvexPart, DcProgram, MaxBlock, SmoothPiece};
use crate::numerics::{ops, DenseMatrix};
use crate::oracles::{oracle_chebyshev_vertices, oracle_chebyshev_zoomed};
use crate::rng::{derive_seed, stream};
use crate::sketch::{distortion_on_span, draw_sketch, embedding_budget, sampled_vertex_residual, SketchKind};
use crate::stationarity::{criticality_distance, directional_residual};

const RUN_COLUMNS: &[&str] =
    &["rule", "seed", "x", "objective", "r_d", "iterations", "lp_calls", "status", "descent_ok", "cpu_s"];

fn config(rule: Rule, seed: u64, sketch: SketchConfig) -> SolverConfig {
    let mut c = SolverConfig::default().with_rule(rule);
    c.seed = seed;
    c.sketch = sketch;
    c
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrapParams {
    seeds: usize,
    centered_cap: usize,
}

impl Default for TrapParams {
    fn default() -> Self {
        Self { seeds: 5, centered_cap: 20 }
    }
}

pub(super) fn trap(ctx: &RecipeContext) -> Result<Vec<Table>> {
    let prm: TrapParams = ctx.params_as()?;
    let p = one_d_trap();
    let mut jobs: Vec<(Rule, u64)> = vec![(Rule::Centered, 0), (Rule::FullVertex, 0)];
    for s in 0..prm.seeds as u64 {
        jobs.push((Rule::RandomVertex, s));
        jobs.push((Rule::Ra, s));
    }
    let mut t = Table::new("runs", RUN_COLUMNS);
    for (rule, s) in jobs {
        let seed = derive_seed(ctx.seed, &[0x77a9, s]);
        let mut cfg = ctx.solver(config(rule, seed, budget_sketch(20, seed)));
        if rule == Rule::Centered {
            cfg.max_iters = cfg.max_iters.min(prm.centered_cap);
        }
        let h = run(&p, &[0.0], &cfg)?;
        t.push(vec![
            rule.label().into(),
            s.into(),
            h.x_final[0].into(),
            h.final_objective.into(),
            h.final_residual.into(),
            h.iterations().into(),
            h.lp_calls().into(),
            status_label(&h).into(),
            h.all_descent_ok().into(),
            h.wall_time_s.into(),
        ]);
    }
    Ok(vec![t])
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PairParams {
    n: usize,
    p: usize,
    instances: usize,
    gamma: Option<f64>,
    centered_cap: Option<usize>,
    /// Sketch rows for RA; the finite-horizon budget when absent.
    dirs: Option<usize>,
    horizon: usize,
    rules: Vec<Rule>,
}

impl Default for PairParams {
    fn default() -> Self {
        Self {
            n: 100,
            p: 500,
            instances: 10,
            gamma: None,
            centered_cap: None,
            dirs: None,
            horizon: 20,
            rules: vec![Rule::Centered, Rule::RandomVertex, Rule::FullVertex, Rule::Ra],
        }
    }
}

/// Signed-pair max-affine (`gamma = None`) or max-quadratic suite.
pub(super) fn signed_pairs(ctx: &RecipeContext, default_gamma: Option<f64>) -> Result<Vec<Table>> {
    let prm: PairParams = ctx.params_as()?;
    let gamma = prm.gamma.or(default_gamma);
    let cap = prm.centered_cap.unwrap_or(if gamma.is_some() { 60 } else { 20 });
    let tag = if gamma.is_some() { 0x9a4d } else { 0xaff1 };

    type Row = Vec<Cell>;
    let per_instance: Vec<Result<Vec<Row>>> = (0..prm.instances)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(ctx.seed, &[tag, i as u64]);
            let p = match gamma {
                Some(gm) => gen_signed_pair_quadratic(prm.n, prm.p, gm, seed)?,
                None => gen_signed_pair_affine(prm.n, prm.p, seed)?,
            };
            let rows = signed_pair_rows(prm.n, prm.p, seed)?;
            let rmax = rows.iter().map(|r| ops::norm2(r)).fold(0.0, f64::max);
            let oracle = -0.5 * rmax * rmax / (1.0 - gamma.unwrap_or(0.0));
            let sketch = match prm.dirs {
                Some(m) => fixed_sketch(m, seed),
                None => budget_sketch(prm.horizon, seed),
            };
            let mut out = Vec::new();
            for &rule in &prm.rules {
                let mut cfg = ctx.solver(config(rule, seed, sketch));
                if matches!(rule, Rule::Centered | Rule::BlockCentered) {
                    cfg.max_iters = cfg.max_iters.min(cap);
                }
                let h = run(&p, &vec![0.0; prm.n], &cfg)?;
                let dirs = h.records.iter().map(|r| r.m_k).max().filter(|m| *m > 0);
                out.push(vec![
                    (i as u64).into(),
                    seed.into(),
                    rule.label().into(),
                    dirs.into(),
                    h.final_objective.into(),
                    h.final_residual.into(),
                    h.iterations().into(),
                    h.lp_calls().into(),
                    status_label(&h).into(),
                    h.all_descent_ok().into(),
                    rmax.into(),
                    oracle.into(),
                    h.wall_time_s.into(),
                ]);
            }
            Ok(out)
        })
        .collect();

    let mut runs = Table::new(
        "runs",
        &[
            "instance", "seed", "rule", "dirs", "objective", "r_d", "iterations", "lp_calls", "status", "descent_ok",
            "max_row_norm", "oracle_objective", "cpu_s",
        ],
    );
    for rows in per_instance {
        for r in rows? {
            runs.push(r);
        }
    }
    let mut summary = Table::new(
        "summary",
        &["n", "p", "rule", "runs", "objective", "r_d", "iterations", "lp_calls", "cpu_s"],
    )
    .comment(match gamma {
        Some(g) => format!("signed-pair max-quadratic, gamma = {g}; means over instances"),
        None => "signed-pair max-affine; means over instances".to_string(),
    });
    for &rule in &prm.rules {
        let sub = runs.filter("rule", rule.label())?;
        summary.push(vec![
            prm.n.into(),
            prm.p.into(),
            rule.label().into(),
            sub.rows.len().into(),
            mean(&sub.floats("objective")?).into(),
            mean(&sub.floats("r_d")?).into(),
            mean(&sub.floats("iterations")?).into(),
            mean(&sub.floats("lp_calls")?).into(),
            mean(&sub.floats("cpu_s")?).into(),
        ]);
    }
    Ok(vec![summary, runs])
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SketchSizeParams {
    n: usize,
    p: usize,
    trials: usize,
    m: Vec<usize>,
    threshold: f64,
}

impl Default for SketchSizeParams {
    fn default() -> Self {
        Self { n: 100, p: 500, trials: 50, m: vec![5, 10, 20, 40, 80, 160], threshold: 0.95 }
    }
}

/// One-step screening from the origin: the true norm of the sketched winner
/// against the largest true norm. Each trial's instance is shared by all `m`.
pub(super) fn sketchsize(ctx: &RecipeContext) -> Result<Vec<Table>> {
    let prm: SketchSizeParams = ctx.params_as()?;
    let trials: Vec<Result<Vec<(usize, f64, f64)>>> = (0..prm.trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(ctx.seed, &[0x5c5e, t as u64]);
            let rows = signed_pair_rows(prm.n, prm.p, seed)?;
            let norms: Vec<f64> = rows.iter().map(|r| ops::norm2(r)).collect();
            let best = max(&norms);
            let cols: Vec<Column<'_>> = rows.iter().map(|r| Column::Slice(r)).collect();
            let g = vec![0.0; prm.n];
            let mut out = Vec::new();
            for &m in &prm.m {
                let d = draw_sketch(m, prm.n, SketchKind::GaussianRows, derive_seed(seed, &[m as u64]))?;
                let clock = Instant::now();
                let (_, win) = sampled_vertex_residual(&d, &cols, &g)?;
                let el = clock.elapsed().as_secs_f64();
                out.push((m, norms[win] / best, el));
            }
            Ok(out)
        })
        .collect();
    let mut detail = Table::new("trials", &["m", "trial", "ratio", "projection_cpu_s"]);
    for (t, r) in trials.into_iter().enumerate() {
        for (m, ratio, el) in r? {
            detail.push(vec![m.into(), t.into(), ratio.into(), el.into()]);
        }
    }
    let mut summary = Table::new("summary", &["m", "trials", "mean_ratio", "min_ratio", "success", "projection_cpu_s"])
        .comment(format!("success: fraction of trials with ratio >= {}", prm.threshold));
    for &m in &prm.m {
        let sub = detail.filter("m", &m.to_string())?;
        let ratios = sub.floats("ratio")?;
        let success = ratios.iter().filter(|r| **r >= prm.threshold).count() as f64 / ratios.len().max(1) as f64;
        summary.push(vec![
            m.into(),
            ratios.len().into(),
            mean(&ratios).into(),
            min(&ratios).into(),
            success.into(),
            mean(&sub.floats("projection_cpu_s")?).into(),
        ]);
    }
    Ok(vec![summary, detail])
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct WorstParams {
    n: usize,
    p: usize,
    instances: usize,
    gamma: f64,
}

impl Default for WorstParams {
    fn default() -> Self {
        Self { n: 100, p: 500, instances: 10, gamma: 0.25 }
    }
}

/// RA with `D = I` on both signed-pair suites, checked against the
/// worst-iterate and ergodic step bounds with `η = 0`.
pub(super) fn worst_iterate(ctx: &RecipeContext) -> Result<Vec<Table>> {
    let prm: WorstParams = ctx.params_as()?;
    let ident = SketchConfig { kind: SketchKind::Identity, size: SketchSize::Identity, base_seed: 0, adaptive_dim: false };
    let jobs: Vec<(&str, usize)> =
        (0..prm.instances).flat_map(|i| [("max-affine", i), ("max-quadratic", i)]).collect();
    let rows: Vec<Result<Vec<Cell>>> = jobs
        .par_iter()
        .map(|&(suite, i)| {
            let seed = derive_seed(ctx.seed, &[0x3e1a, i as u64]);
            let p = if suite == "max-affine" {
                gen_signed_pair_affine(prm.n, prm.p, seed)?
            } else {
                gen_signed_pair_quadratic(prm.n, prm.p, prm.gamma, seed)?
            };
            let cfg = ctx.solver(config(Rule::Ra, seed, ident));
            let h = run(&p, &vec![0.0; prm.n], &cfg)?;
            let rep = worst_iterate_diagnostic(&h, 0.0, p.g().lipschitz(), h.sigma, h.mu, None);
            Ok(vec![
                suite.into(),
                i.into(),
                h.iterations().into(),
                rep.checked.into(),
                rep.violations.into(),
                rep.tail_violations.into(),
                rep.ergodic_ok.into(),
                rep.min_step.into(),
                rep.ergodic_bound.into(),
                h.all_descent_ok().into(),
            ])
        })
        .collect();
    let mut t = Table::new(
        "runs",
        &[
            "suite", "instance", "iterations", "checked", "violations", "tail_violations", "ergodic_ok", "min_step",
            "ergodic_bound", "descent_ok",
        ],
    );
    for r in rows {
        t.push(r?);
    }
    Ok(vec![t])
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct NearParams {
    eps0: f64,
    beta: f64,
    tau0: f64,
    random_seeds: usize,
}

impl Default for NearParams {
    fn default() -> Self {
        Self { eps0: 4e-4, beta: 2.0, tau0: 2.5e-2, random_seeds: 10 }
    }
}

/// Pieces `{0, c_i x − δ}` started at 0, where only the flat piece is exactly
/// active. The eps-active baselines take one step; RA runs to convergence.
pub(super) fn nearactive(ctx: &RecipeContext) -> Result<Vec<Table>> {
    let prm: NearParams = ctx.params_as()?;
    let p = near_active_diagnostic();
    let exact = SketchConfig {
        kind: SketchKind::ScaledSphereRows,
        size: SketchSize::Fixed(1),
        base_seed: derive_seed(ctx.seed, &[0x4ea7]),
        adaptive_dim: false,
    };
    let base = |rule: Rule, seed: u64, tau: f64| {
        let mut c = ctx.solver(config(rule, seed, exact));
        c.eps = EpsSchedule::Power { eps0: prm.eps0, beta: prm.beta };
        c.tau = TauSchedule::Fixed(tau);
        c
    };
    let mut t = Table::new(
        "methods",
        &["method", "runs", "x", "objective", "exact_residual", "iterations", "lp_calls", "descent_ok", "cpu_s"],
    )
    .comment("eps-active baselines take a single step; random rows average over seeds");
    let mut add = |name: &str, hs: Vec<crate::driver::RunHistory>| {
        let f = |g: &dyn Fn(&crate::driver::RunHistory) -> f64| mean(&hs.iter().map(g).collect::<Vec<_>>());
        t.push(vec![
            name.into(),
            hs.len().into(),
            f(&|h| h.x_final[0]).into(),
            f(&|h| h.final_objective).into(),
            f(&|h| h.final_residual).into(),
            f(&|h| h.iterations() as f64).into(),
            f(&|h| h.lp_calls() as f64).into(),
            hs.iter().all(|h| h.all_descent_ok()).into(),
            f(&|h| h.wall_time_s).into(),
        ]);
    };
    for (name, rule) in [("centered eps-active", Rule::Centered), ("full-vertex eps-active", Rule::FullVertex)] {
        let mut c = base(rule, 0, prm.tau0);
        c.max_iters = 1;
        add(name, vec![run(&p, &[0.0], &c)?]);
    }
    let mut hs = Vec::new();
    for s in 0..prm.random_seeds as u64 {
        let mut c = base(Rule::RandomVertex, derive_seed(ctx.seed, &[0x4ea8, s]), prm.tau0);
        c.max_iters = 1;
        hs.push(run(&p, &[0.0], &c)?);
    }
    add("random eps-active", hs);
    add("ra lp-fallback", vec![run(&p, &[0.0], &base(Rule::Ra, 0, prm.tau0))?]);
    add("ra vertex-forced", vec![run(&p, &[0.0], &base(Rule::Ra, 0, 0.0))?]);
    Ok(vec![t])
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LpParams {
    small: usize,
    large_per_shape: usize,
    n: usize,
    large_m: Vec<usize>,
    large_r: Vec<usize>,
}

impl Default for LpParams {
    fn default() -> Self {
        Self { small: 200, large_per_shape: 50, n: 100, large_m: vec![40, 80], large_r: vec![20, 50] }
    }
}

fn gaussian(r: &mut impl Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| scale * r.sample::<f64, _>(StandardNormal)).collect()
}

/// Exact LP against the zoomed grid oracle on tiny instances, and the
/// projected fallback against the exact LP on sketched active sets.
pub(super) fn lpbackend(ctx: &RecipeContext) -> Result<Vec<Table>> {
    let prm: LpParams = ctx.params_as()?;
    let exact = LpConfig::default();
    let fallback = LpConfig { exact: false, ..LpConfig::default() };

    let small: Vec<Result<Vec<Cell>>> = (0..prm.small)
        .into_par_iter()
        .map(|i| {
            let mut r = stream(ctx.seed, &[0x1b0a, i as u64]);
            let m = r.random_range(1..=5usize);
            let k = r.random_range(1..=4usize);
            let a = DenseMatrix::from_row_major(m, k, gaussian(&mut r, m * k, 1.0))?;
            let b = gaussian(&mut r, m, 1.0);
            let sol = solve_chebyshev(&a, &b, &exact)?;
            let (t_grid, _) = oracle_chebyshev_zoomed(&a, &b)?;
            let (t_vertex, _) = oracle_chebyshev_vertices(&a, &b)?;
            Ok(vec![
                i.into(),
                m.into(),
                k.into(),
                sol.t.into(),
                t_vertex.into(),
                t_grid.into(),
                (sol.t - t_vertex).abs().into(),
                (sol.t <= t_grid + 1e-12).into(),
            ])
        })
        .collect();
    let mut st = Table::new(
        "small",
        &["instance", "m", "r", "t_lp", "t_vertex", "t_grid", "abs_diff", "below_grid"],
    )
    .comment("t_vertex: basic-solution enumeration; t_grid: zoomed simplex grid (an upper bound)")
    .comment("abs_diff = |t_lp - t_vertex|");
    for row in small {
        st.push(row?);
    }

    let shapes: Vec<(usize, usize, usize)> = prm
        .large_m
        .iter()
        .flat_map(|&m| prm.large_r.iter().map(move |&k| (m, k)))
        .flat_map(|(m, k)| (0..prm.large_per_shape).map(move |i| (m, k, i)))
        .collect();
    let n = prm.n;
    let large: Vec<Result<Vec<Cell>>> = shapes
        .par_iter()
        .map(|&(m, k, i)| {
            let seed = derive_seed(ctx.seed, &[0x1b0b, m as u64, k as u64, i as u64]);
            let mut r = stream(seed, &[]);
            let s = 1.0 / (n as f64).sqrt();
            let gcols: Vec<Vec<f64>> = (0..k).map(|_| gaussian(&mut r, n, s)).collect();
            let g = gaussian(&mut r, n, 4.0 * s);
            let d = draw_sketch(m, n, SketchKind::GaussianRows, seed)?;
            let dcols: Vec<Vec<f64>> = gcols.iter().map(|c| d.apply(c)).collect();
            let a = DenseMatrix::from_columns(m, &dcols)?;
            let b = d.apply(&g);
            let c0 = Instant::now();
            let ex = solve_chebyshev(&a, &b, &exact)?;
            let t_ex = c0.elapsed().as_secs_f64();
            let c1 = Instant::now();
            let fb = solve_chebyshev(&a, &b, &fallback)?;
            let t_fb = c1.elapsed().as_secs_f64();
            Ok(vec![
                m.into(),
                k.into(),
                i.into(),
                ex.t.into(),
                fb.t.into(),
                (fb.t / ex.t).into(),
                t_ex.into(),
                t_fb.into(),
            ])
        })
        .collect();
    let mut lt = Table::new(
        "large",
        &["dirs", "active", "instance", "t_exact", "t_projected", "ratio", "exact_cpu_s", "projected_cpu_s"],
    );
    for row in large {
        lt.push(row?);
    }
    let mut summary = Table::new("summary", &["dirs", "active", "instances", "mean_ratio", "max_ratio", "exact_cpu_s", "projected_cpu_s"])
        .comment("ratio: projected-fallback LP value over the exact LP value");
    for &m in &prm.large_m {
        for &k in &prm.large_r {
            let sub = lt.filter("dirs", &m.to_string())?.filter("active", &k.to_string())?;
            let ratios = sub.floats("ratio")?;
            summary.push(vec![
                m.into(),
                k.into(),
                ratios.len().into(),
                mean(&ratios).into(),
                max(&ratios).into(),
                mean(&sub.floats("exact_cpu_s")?).into(),
                mean(&sub.floats("projected_cpu_s")?).into(),
            ]);
        }
    }
    Ok(vec![summary, st, lt])
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EmbedParams {
    c: f64,
    eta: f64,
    delta: f64,
    d: usize,
    n: usize,
    trials: usize,
}

impl Default for EmbedParams {
    fn default() -> Self {
        Self { c: 8.0, eta: 0.5, delta: 0.01, d: 5, n: 100, trials: 500 }
    }
}

/// Gram-Schmidt on Gaussian columns.
fn random_orthonormal(n: usize, d: usize, seed: u64) -> Result<DenseMatrix> {
    let mut r = stream(seed, &[0x0b75]);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v = gaussian(&mut r, n, 1.0);
        for _ in 0..2 {
            for b in &basis {
                let c = ops::dot(&v, b);
                ops::axpy(-c, b, &mut v);
            }
        }
        let nv = ops::norm2(&v);
        if nv > 1e-8 {
            basis.push(ops::scale(1.0 / nv, &v));
        }
    }
    DenseMatrix::from_columns(n, &basis)
}

/// Budgets for the QUBO settings, and the Monte-Carlo sandwich violation rate.
pub(super) fn embedding(ctx: &RecipeContext) -> Result<Vec<Table>> {
    let prm: EmbedParams = ctx.params_as()?;
    let mut budgets = Table::new("budgets", &["n", "starts", "horizon", "c", "eta", "delta", "m"])
        .comment("finite horizon K = 60 * starts, d = n");
    for (n, starts) in [(50usize, 40usize), (100, 60), (250, 80)] {
        let k = 60 * starts;
        budgets.push(vec![
            n.into(),
            starts.into(),
            k.into(),
            1.0.into(),
            0.8.into(),
            0.05.into(),
            embedding_budget(n, 0.8, 0.05 / k as f64, 1.0)?.into(),
        ]);
    }
    let m = embedding_budget(prm.d, prm.eta, prm.delta, prm.c)?;
    let mut dist = Table::new(
        "distortion",
        &["kind", "n", "d", "m", "trials", "violations", "violation_rate", "mean_sigma_min", "mean_sigma_max"],
    );
    for kind in [SketchKind::GaussianRows, SketchKind::ScaledSphereRows] {
        let res: Vec<Result<(f64, f64)>> = (0..prm.trials)
            .into_par_iter()
            .map(|t| {
                let seed = derive_seed(ctx.seed, &[0xe3b, t as u64]);
                let u = random_orthonormal(prm.n, prm.d, seed)?;
                let d = draw_sketch(m, prm.n, kind, seed)?;
                distortion_on_span(&d, &u)
            })
            .collect();
        let res = res.into_iter().collect::<Result<Vec<_>>>()?;
        let viol = res.iter().filter(|(lo, hi)| *lo < 1.0 - prm.eta || *hi > 1.0 + prm.eta).count();
        dist.push(vec![
            format!("{kind:?}").into(),
            prm.n.into(),
            prm.d.into(),
            m.into(),
            prm.trials.into(),
            viol.into(),
            (viol as f64 / prm.trials as f64).into(),
            mean(&res.iter().map(|r| r.0).collect::<Vec<_>>()).into(),
            mean(&res.iter().map(|r| r.1).collect::<Vec<_>>()).into(),
        ]);
    }
    Ok(vec![budgets, dist])
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CritParams {
    pairs: usize,
    strict: usize,
}

impl Default for CritParams {
    fn default() -> Self {
        Self { pairs: 500, strict: 10 }
    }
}

/// Integer max-affine programs with planted exact ties, so the active set is
/// exact in floating point.
fn tied_program(seed: u64) -> Result<(DcProgram, Vec<f64>, usize)> {
    let mut r = stream(seed, &[0xc417]);
    let n = r.random_range(2..=6usize);
    let pieces = r.random_range(2..=8usize);
    let x: Vec<f64> = (0..n).map(|_| r.random_range(-2i32..=2) as f64).collect();
    let tied = r.random_range(1..=pieces);
    let mut ps = Vec::with_capacity(pieces);
    for i in 0..pieces {
        let a: Vec<f64> = (0..n).map(|_| r.random_range(-3i32..=3) as f64).collect();
        let ax = ops::dot(&a, &x);
        let b = if i < tied { 5.0 - ax } else { 5.0 - ax - r.random_range(1i32..=4) as f64 };
        ps.push(SmoothPiece::affine(a, b)?);
    }
    let p = DcProgram::new(
        ConvexPart::scaled_identity(n, 1.0)?,
        vec![MaxBlock::new(BlockKind::Pieces(ps), 1.0)?],
        None,
        0.0,
    )?;
    Ok((p, x, tied))
}

pub(super) fn criticality(ctx: &RecipeContext) -> Result<Vec<Table>> {
    let prm: CritParams = ctx.params_as()?;
    let rows: Vec<Result<Vec<Cell>>> = (0..prm.pairs)
        .into_par_iter()
        .map(|i| {
            let (p, x, tied) = tied_program(derive_seed(ctx.seed, &[0xc418, i as u64]))?;
            let rd = directional_residual(&p, &x, 0.0)?.r_d;
            let dist = criticality_distance(&p, &x)?;
            Ok(vec![
                i.into(),
                p.dim().into(),
                tied.into(),
                rd.into(),
                dist.into(),
                (dist <= rd + 1e-9).into(),
            ])
        })
        .collect();
    let mut t = Table::new("pairs", &["case", "n", "active", "r_d", "criticality_dist", "ok"]);
    for r in rows {
        t.push(r?);
    }
    let mut s = Table::new("strict", &["seed", "r_d", "criticality_dist"])
        .comment("signed pairs at the origin: critical but not d-stationary");
    for k in 0..prm.strict as u64 {
        let p = gen_signed_pair_affine(10, 50, derive_seed(ctx.seed, &[0xc419, k]))?;
        let x = vec![0.0; 10];
        s.push(vec![k.into(), directional_residual(&p, &x, 0.0)?.r_d.into(), criticality_distance(&p, &x)?.into()]);
    }
    Ok(vec![t, s])
}
