use std::fs;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use super::{budget_sketch, mean, min, skipped_row, status_label, Cell, RecipeContext, RecipeOutput, Table};
use crate::driver::{run, Rule, RunHistory, SolverConfig};
use crate::error::Result;
use crate::instances::{
    build_support_model, build_topk_model, build_trimmed_model, gen_lcp, known_dimension, lcp_gaps, parse_libsvm,
    synthetic_sparse, SparseDataset,
};
use crate::numerics::{ops, SparseMatrixCSR};
use crate::oracles::{oracle_best_aggregate, AggregateBlock};
use crate::rng::derive_seed;
use crate::rules::{select_block_aggregate, AggregateMode, Geometry};
use crate::sketch::{draw_sketch, SketchKind};

fn block_config(rule: Rule, seed: u64, horizon: usize) -> SolverConfig {
    let mut c = SolverConfig::default().with_rule(rule);
    c.seed = seed;
    c.sketch = budget_sketch(horizon, seed);
    c
}

fn dirs_of(h: &RunHistory) -> Option<usize> {
    h.records.iter().map(|r| r.m_k).max().filter(|m| *m > 0)
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TopkSynthParams {
    instances: usize,
    small_rows: usize,
    small_k: usize,
    large_rows: usize,
    large_k: usize,
    n: usize,
    max_nnz: usize,
    horizon: usize,
}

impl Default for TopkSynthParams {
    fn default() -> Self {
        Self { instances: 20, small_rows: 12, small_k: 3, large_rows: 2000, large_k: 10, n: 100, max_nnz: 10, horizon: 20 }
    }
}

/// Aggregate norms at the origin for one top-k instance: enumeration (when
/// requested), full-space greedy, sketched greedy, random and centered.
fn topk_norms(x: &SparseMatrixCSR, k: usize, m: usize, seed: u64, enumerate: bool) -> Result<Vec<(&'static str, f64, f64)>> {
    let p = build_topk_model(x, k)?;
    let n = x.n_cols();
    let w = vec![0.0; n];
    let g = p.grad_g(&w)?;
    let active = p.active_set(&w, 0.0)?;
    let grads = p.active_gradients(&w, &active)?;
    let geo = Geometry { grad_g: &g, x: &w, bounds: None };
    let mut out = Vec::new();
    let mut timed = |name: &'static str, f: &dyn Fn() -> Result<Vec<f64>>| -> Result<()> {
        let c = Instant::now();
        let v = f()?;
        let el = c.elapsed().as_secs_f64();
        out.push((name, ops::norm2(&ops::sub(&g, &v)), el));
        Ok(())
    };
    if enumerate {
        let rows: Vec<Vec<f64>> = (0..x.n_rows()).map(|r| x.row_dense(r)).collect();
        timed("enumeration", &|| {
            Ok(oracle_best_aggregate(&[AggregateBlock::SignedSubset { rows: rows.clone(), k, weight: 1.0 }], &g, 1 << 20)?.1)
        })?;
    }
    timed("block-greedy-full", &|| Ok(select_block_aggregate(&grads, &geo, AggregateMode::GreedyFull)?.v))?;
    let d = draw_sketch(m, n, SketchKind::GaussianRows, seed)?;
    timed("block-greedy-sketched", &|| Ok(select_block_aggregate(&grads, &geo, AggregateMode::GreedySketched(&d))?.v))?;
    timed("block-random", &|| Ok(select_block_aggregate(&grads, &geo, AggregateMode::Random(seed))?.v))?;
    timed("block-centered", &|| Ok(select_block_aggregate(&grads, &geo, AggregateMode::Centered)?.v))?;
    Ok(out)
}

pub(super) fn topk_synthetic(ctx: &RecipeContext) -> Result<Vec<Table>> {
    let prm: TopkSynthParams = ctx.params_as()?;
    let m = budget_sketch(prm.horizon, 0).rows_at(0, prm.n, 0)?;
    let jobs: Vec<(&'static str, usize)> =
        (0..prm.instances).flat_map(|i| [("small", i), ("large", i)]).collect();
    let res: Vec<Result<Vec<Vec<Cell>>>> = jobs
        .par_iter()
        .map(|&(size, i)| {
            let seed = derive_seed(ctx.seed, &[0x70c1, i as u64, (size == "large") as u64]);
            let (rows, k) = if size == "small" { (prm.small_rows, prm.small_k) } else { (prm.large_rows, prm.large_k) };
            let x = synthetic_sparse(rows, prm.n, prm.max_nnz, seed)?;
            let norms = topk_norms(&x, k, m, seed, size == "small")?;
            let greedy = norms.iter().find(|r| r.0 == "block-greedy-full").map_or(f64::NAN, |r| r.1);
            let opt = norms.iter().find(|r| r.0 == "enumeration").map(|r| r.1);
            Ok(norms
                .iter()
                .map(|&(name, norm, el)| {
                    vec![
                        size.into(),
                        i.into(),
                        rows.into(),
                        prm.n.into(),
                        k.into(),
                        name.into(),
                        (name == "block-greedy-sketched").then_some(m).into(),
                        norm.into(),
                        (norm / greedy).into(),
                        opt.map(|o| norm / o).into(),
                        el.into(),
                    ]
                })
                .collect())
        })
        .collect();
    let mut t = Table::new(
        "instances",
        &["size", "instance", "rows", "n", "k", "method", "dirs", "norm", "ratio_to_greedy", "ratio_to_optimum", "cpu_s"],
    )
    .comment("aggregate norms at the origin; ratios against full-space greedy and exact enumeration");
    for r in res {
        for row in r? {
            t.push(row);
        }
    }
    let mut s = Table::new("summary", &["size", "method", "mean_ratio_to_greedy", "min_ratio_to_greedy", "mean_ratio_to_optimum", "min_ratio_to_optimum"]);
    for size in ["small", "large"] {
        let sub = t.filter("size", size)?;
        for method in ["enumeration", "block-greedy-full", "block-greedy-sketched", "block-random", "block-centered"] {
            let mm = sub.filter("method", method)?;
            if mm.rows.is_empty() {
                continue;
            }
            let rg = mm.floats("ratio_to_greedy")?;
            let ro = mm.floats("ratio_to_optimum")?;
            s.push(vec![
                size.into(),
                method.into(),
                mean(&rg).into(),
                min(&rg).into(),
                (!ro.is_empty()).then(|| mean(&ro)).into(),
                (!ro.is_empty()).then(|| min(&ro)).into(),
            ]);
        }
    }
    Ok(vec![s, t])
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LcpParams {
    n: usize,
    instances: usize,
    nnz_per_row: usize,
    horizon: usize,
    rules: Vec<Rule>,
}

impl Default for LcpParams {
    fn default() -> Self {
        Self {
            n: 100,
            instances: 8,
            nnz_per_row: 5,
            horizon: 20,
            rules: vec![Rule::BlockCentered, Rule::BlockRandom, Rule::BlockGreedyFull, Rule::BlockGreedySketched],
        }
    }
}

pub(super) fn lcp(ctx: &RecipeContext) -> Result<Vec<Table>> {
    let prm: LcpParams = ctx.params_as()?;
    let res: Vec<Result<Vec<Vec<Cell>>>> = (0..prm.instances)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(ctx.seed, &[0x1c90, i as u64]);
            let inst = gen_lcp(prm.n, prm.nnz_per_row, seed)?;
            let x0 = vec![0.5; prm.n];
            let mut out = Vec::new();
            for &rule in &prm.rules {
                let cfg = ctx.solver(block_config(rule, seed, prm.horizon));
                let h = run(&inst.program, &x0, &cfg)?;
                let (min_gap, prod_gap) = lcp_gaps(&inst.m, &h.x_final);
                out.push(vec![
                    i.into(),
                    rule.label().into(),
                    dirs_of(&h).into(),
                    h.final_objective.into(),
                    min_gap.into(),
                    prod_gap.into(),
                    h.iterations().into(),
                    status_label(&h).into(),
                    h.all_descent_ok().into(),
                    h.wall_time_s.into(),
                ]);
            }
            Ok(out)
        })
        .collect();
    let mut t = Table::new(
        "runs",
        &["instance", "rule", "dirs", "objective", "min_gap", "product_gap", "iterations", "status", "descent_ok", "cpu_s"],
    );
    for r in res {
        for row in r? {
            t.push(row);
        }
    }
    let mut s = Table::new("summary", &["n", "rule", "dirs", "objective", "min_gap", "product_gap", "iterations", "cpu_s"])
        .comment("min gap: mean of min{x_i, (Mx)_i}; product gap: mean of |x_i (Mx)_i|");
    for &rule in &prm.rules {
        let sub = t.filter("rule", rule.label())?;
        let dirs = sub.floats("dirs")?;
        s.push(vec![
            prm.n.into(),
            rule.label().into(),
            dirs.first().map(|d| *d as usize).into(),
            mean(&sub.floats("objective")?).into(),
            mean(&sub.floats("min_gap")?).into(),
            mean(&sub.floats("product_gap")?).into(),
            mean(&sub.floats("iterations")?).into(),
            mean(&sub.floats("cpu_s")?).into(),
        ]);
    }
    Ok(vec![s, t])
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LibsvmParams {
    datasets: Vec<String>,
    k: usize,
    q: usize,
    lambda: f64,
    random_runs: usize,
    horizon: usize,
}

impl Default for LibsvmParams {
    fn default() -> Self {
        Self {
            datasets: vec!["a8a".into(), "phishing".into(), "w8a".into()],
            k: 50,
            q: 500,
            lambda: 1e-2,
            random_runs: 10,
            horizon: 20,
        }
    }
}

fn load_dataset(ctx: &RecipeContext, name: &str) -> Result<std::result::Result<SparseDataset, std::path::PathBuf>> {
    let candidates = [ctx.data_file(name), ctx.data_file(&format!("{name}.txt"))];
    let Some(path) = candidates.iter().find(|p| p.is_file()) else {
        return Ok(Err(candidates[0].clone()));
    };
    let text = fs::read_to_string(path)?;
    Ok(Ok(parse_libsvm(&text, known_dimension(name))?))
}

/// Trimmed mean of squared residuals over the `N − q` smallest.
fn trimmed_mse(x: &SparseMatrixCSR, y: &[f64], w: &[f64], q: usize) -> f64 {
    let mut r2: Vec<f64> = x.matvec(w).iter().zip(y).map(|(a, b)| (a - b) * (a - b)).collect();
    r2.sort_by(f64::total_cmp);
    let keep = r2.len() - q.min(r2.len());
    mean(&r2[..keep])
}

/// One DCA step from the origin on the LIBSVM support, top-k, or trimmed model.
pub(super) fn libsvm(recipe: &str, ctx: &RecipeContext) -> Result<RecipeOutput> {
    let prm: LibsvmParams = ctx.params_as()?;
    let (rules, metric): (Vec<Rule>, &str) = match recipe {
        "support" => (vec![Rule::Centered, Rule::RandomVertex, Rule::FullVertex, Rule::Ra], "norm_ratio"),
        "topk" => (
            vec![Rule::BlockCentered, Rule::BlockRandom, Rule::BlockGreedyFull, Rule::BlockGreedySketched],
            "norm_ratio",
        ),
        _ => (
            vec![Rule::BlockCentered, Rule::BlockRandom, Rule::BlockGreedyFull, Rule::BlockGreedySketched],
            "trimmed_mse",
        ),
    };
    let mut t = Table::new(
        "summary",
        &["data", "samples", "features", "param", "method", "runs", "dirs", "objective", metric, "hit_rate", "cpu_s"],
    )
    .comment(match recipe {
        "support" => "norm ratio: |w1| / max_i |a_i|; hit rate: fraction of runs at the full-vertex objective",
        "topk" => "norm ratio: |w1| relative to the full-space greedy step; hit rate: fraction at its objective",
        _ => "trimmed mse over the retained N - q samples; hit rate: fraction at the full-space greedy objective",
    });
    let mut missing = Vec::new();
    for name in &prm.datasets {
        let ds = match load_dataset(ctx, name)? {
            Ok(ds) => ds,
            Err(path) => {
                skipped_row(&mut t, &path);
                missing.push(path);
                continue;
            }
        };
        let (x, y) = (&ds.x, &ds.labels);
        let (program, param) = match recipe {
            "support" => (build_support_model(x)?, Cell::Missing),
            "topk" => (build_topk_model(x, prm.k)?, prm.k.into()),
            _ => (build_trimmed_model(x, y, prm.q, prm.lambda)?, prm.q.into()),
        };
        let n = ds.n_features();
        let w0 = vec![0.0; n];
        let rmax = (0..x.n_rows()).map(|r| x.row_norm2_sq(r)).fold(0.0, f64::max).sqrt();
        let mut results: Vec<(Rule, Vec<RunHistory>)> = Vec::new();
        for &rule in &rules {
            let reps = if matches!(rule, Rule::RandomVertex | Rule::BlockRandom) { prm.random_runs } else { 1 };
            let hs = (0..reps as u64)
                .into_par_iter()
                .map(|s| {
                    let seed = derive_seed(ctx.seed, &[0x11b5, s]);
                    let mut cfg = ctx.solver(block_config(rule, seed, prm.horizon));
                    cfg.max_iters = 1;
                    run(&program, &w0, &cfg)
                })
                .collect::<Result<Vec<_>>>()?;
            results.push((rule, hs));
        }
        let reference_rule = if recipe == "support" { Rule::FullVertex } else { Rule::BlockGreedyFull };
        let reference = results.iter().find(|r| r.0 == reference_rule).map(|r| r.1[0].clone());
        let ref_obj = reference.as_ref().map_or(f64::NAN, |h| h.final_objective);
        let ref_norm = reference.as_ref().map_or(f64::NAN, |h| ops::norm2(&h.x_final));
        for (rule, hs) in &results {
            let m = |f: &dyn Fn(&RunHistory) -> f64| mean(&hs.iter().map(f).collect::<Vec<_>>());
            let metric_value = match recipe {
                "support" => m(&|h| ops::norm2(&h.x_final) / rmax),
                "topk" => m(&|h| ops::norm2(&h.x_final) / ref_norm),
                _ => m(&|h| trimmed_mse(x, y, &h.x_final, prm.q)),
            };
            let hits = hs
                .iter()
                .filter(|h| (h.final_objective - ref_obj).abs() <= 1e-12 * (1.0 + ref_obj.abs()))
                .count() as f64
                / hs.len() as f64;
            t.push(vec![
                name.as_str().into(),
                ds.n_samples().into(),
                n.into(),
                param.clone(),
                rule.label().into(),
                hs.len().into(),
                dirs_of(&hs[0]).into(),
                m(&|h| h.final_objective).into(),
                metric_value.into(),
                hits.into(),
                m(&|h| h.wall_time_s).into(),
            ]);
        }
    }
    Ok(RecipeOutput { recipe: recipe.into(), tables: vec![t], missing })
}
