use std::fs;

use rayon::prelude::*;
use serde::Deserialize;

use super::{mean, skipped_row, Cell, RecipeContext, RecipeOutput, Table};
use crate::driver::{multistart, run, Rule, SketchConfig, SketchSize, SolverConfig};
use crate::error::{Error, Result};
use crate::instances::{
    build_qubo_penalty, dc_split_shift, dc_split_spectral, parse_orlib_qubo_with, qubo_starts, random_qubo,
    OrlibConvention, QuboInstance,
};
use crate::model::DcProgram;
use crate::oracles::oracle_enumerate_qubo;
use crate::rng::derive_seed;
use crate::sketch::SketchKind;

/// Biq Mac best-known minimization values for the OR-Library bqp sets.
pub const BQP_BEST_KNOWN: &[(&str, [f64; 10])] = &[
    ("bqp50", [-2098., -3702., -4626., -3544., -4012., -3693., -4520., -4216., -3780., -3507.]),
    ("bqp100", [-7970., -11036., -12723., -10368., -9083., -10210., -10125., -11435., -11455., -12565.]),
    ("bqp250", [-45607., -44810., -49037., -41274., -47961., -41014., -46757., -35726., -48916., -40442.]),
];

/// Best-known value for a name such as `bqp100.3`.
pub fn best_known(name: &str) -> Option<f64> {
    let (set, idx) = name.split_once('.')?;
    let i: usize = idx.parse().ok()?;
    let (_, vals) = BQP_BEST_KNOWN.iter().find(|(s, _)| *s == set)?;
    vals.get(i.checked_sub(1)?).copied()
}

const RHO: f64 = 1.0;

fn gap_pct(v: f64, best: f64) -> f64 {
    100.0 * (v - best) / best.abs().max(f64::MIN_POSITIVE)
}

fn qubo_config(rule: Rule, seed: u64, starts: usize, max_iters: usize) -> SolverConfig {
    let mut c = SolverConfig::default().with_rule(rule);
    c.seed = seed;
    c.max_iters = max_iters;
    c.sketch = SketchConfig {
        kind: SketchKind::GaussianRows,
        size: SketchSize::Budget { c: 1.0, eta: 0.8, delta: 0.05, horizon: Some(max_iters * starts), dim: None },
        base_seed: seed,
        adaptive_dim: false,
    };
    c
}

fn penalty(inst: &QuboInstance, split: &str) -> Result<DcProgram> {
    let s = match split {
        "shift" => dc_split_shift(&inst.q)?,
        "spectral" => dc_split_spectral(&inst.q)?,
        other => return Err(Error::Config(format!("unknown split `{other}`"))),
    };
    build_qubo_penalty(&s, RHO)
}

struct MethodResult {
    method: &'static str,
    starts: usize,
    dirs: Option<usize>,
    rounded: f64,
    relaxed: f64,
    iterations: usize,
    descent_ok: bool,
    cpu_s: f64,
}

/// Centered from `½·1`, then the multistart rules.
fn solve_all(
    p: &DcProgram,
    n: usize,
    starts: usize,
    max_iters: usize,
    multistart_rules: &[Rule],
    seed: u64,
    ctx: &RecipeContext,
) -> Result<Vec<MethodResult>> {
    let mut out = Vec::new();
    let cfg = ctx.solver(qubo_config(Rule::BlockCentered, seed, 1, max_iters));
    let h = run(p, &vec![0.5; n], &cfg)?;
    out.push(MethodResult {
        method: Rule::BlockCentered.label(),
        starts: 1,
        dirs: None,
        rounded: h.score(),
        relaxed: h.final_objective,
        iterations: h.iterations(),
        descent_ok: h.all_descent_ok(),
        cpu_s: h.wall_time_s,
    });
    let xs = qubo_starts(n, starts, seed);
    for &rule in multistart_rules {
        let cfg = ctx.solver(qubo_config(rule, seed, starts, max_iters));
        let (best, runs) = multistart(p, &xs, &cfg)?;
        let b = &runs[best];
        out.push(MethodResult {
            method: rule.label(),
            starts,
            dirs: rule.uses_sketch().then(|| cfg.sketch.rows_at(0, n, 0)).transpose()?,
            rounded: b.score(),
            relaxed: b.final_objective,
            iterations: runs.iter().map(|r| r.iterations()).sum(),
            descent_ok: runs.iter().all(|r| r.all_descent_ok()),
            cpu_s: runs.iter().map(|r| r.wall_time_s).sum(),
        });
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MicroParams {
    n: usize,
    instances: usize,
    starts: usize,
    max_iters: usize,
    rules: Vec<Rule>,
}

impl Default for MicroParams {
    fn default() -> Self {
        Self { n: 12, instances: 20, starts: 20, max_iters: 60, rules: vec![Rule::BlockRa, Rule::BlockRandom] }
    }
}

pub(super) fn micro(ctx: &RecipeContext) -> Result<Vec<Table>> {
    let prm: MicroParams = ctx.params_as()?;
    let res: Vec<Result<Vec<Vec<Cell>>>> = (0..prm.instances)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(ctx.seed, &[0x9b0b, i as u64]);
            let inst = random_qubo(prm.n, seed)?;
            let (_, opt) = oracle_enumerate_qubo(&inst.q)?;
            let p = penalty(&inst, "shift")?;
            let results = solve_all(&p, prm.n, prm.starts, prm.max_iters, &prm.rules, seed, ctx)?;
            let centered = results[0].rounded;
            Ok(results
                .iter()
                .map(|r| {
                    vec![
                        i.into(),
                        r.method.into(),
                        r.starts.into(),
                        r.dirs.into(),
                        opt.into(),
                        r.rounded.into(),
                        gap_pct(r.rounded, opt).into(),
                        (r.rounded <= opt).into(),
                        (r.rounded <= centered).into(),
                        r.relaxed.into(),
                        r.iterations.into(),
                        r.descent_ok.into(),
                        r.cpu_s.into(),
                    ]
                })
                .collect())
        })
        .collect();
    let mut t = Table::new(
        "instances",
        &[
            "instance",
            "method",
            "starts",
            "dirs",
            "optimum",
            "rounded",
            "gap_pct",
            "hit",
            "not_worse_than_centered",
            "relaxed_objective",
            "iterations",
            "descent_ok",
            "cpu_s",
        ],
    )
    .comment("random integer QUBO, shift split, rho = 1; optimum by exhaustive enumeration")
    .comment("gap_pct = 100 (rounded - optimum) / |optimum|");
    for r in res {
        for row in r? {
            t.push(row);
        }
    }
    let mut s = Table::new(
        "summary",
        &["n", "method", "starts", "instances", "hits", "hit_rate", "mean_gap_pct", "not_worse_than_centered", "descent_ok"],
    );
    let mut methods = vec![Rule::BlockCentered];
    methods.extend(&prm.rules);
    for m in methods {
        let sub = t.filter("method", m.label())?;
        let count = |col: &str| -> Result<usize> {
            let c = sub.column(col)?;
            Ok(sub.rows.iter().filter(|r| r[c].as_bool() == Some(true)).count())
        };
        let hits = count("hit")?;
        s.push(vec![
            prm.n.into(),
            m.label().into(),
            sub.floats("starts")?.first().map(|v| *v as usize).into(),
            sub.rows.len().into(),
            hits.into(),
            (hits as f64 / sub.rows.len() as f64).into(),
            mean(&sub.floats("gap_pct")?).into(),
            (count("not_worse_than_centered")? == sub.rows.len()).into(),
            (count("descent_ok")? == sub.rows.len()).into(),
        ]);
    }
    Ok(vec![s, t])
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OrlibParams {
    sets: Vec<String>,
    /// Instances per set; at most 10.
    instances: usize,
    splits: Vec<String>,
    /// Multistart budget per set, in the order of `sets`.
    starts: Vec<usize>,
    max_iters: usize,
    rules: Vec<Rule>,
    convention: OrlibConvention,
}

impl Default for OrlibParams {
    fn default() -> Self {
        Self {
            sets: vec!["bqp50".into(), "bqp100".into(), "bqp250".into()],
            instances: 10,
            splits: vec!["shift".into(), "spectral".into()],
            starts: vec![40, 60, 80],
            max_iters: 60,
            rules: vec![Rule::BlockRandom, Rule::BlockRa],
            convention: OrlibConvention::Symmetric,
        }
    }
}

pub(super) fn orlib(ctx: &RecipeContext) -> Result<RecipeOutput> {
    let prm: OrlibParams = ctx.params_as()?;
    let mut t = Table::new(
        "instances",
        &[
            "instance",
            "n",
            "split",
            "method",
            "starts",
            "dirs",
            "best_known",
            "rounded",
            "gap_pct",
            "relaxed_objective",
            "iterations",
            "descent_ok",
            "cpu_s",
        ],
    )
    .comment("minimization form, rho = 1; gap_pct = 100 (rounded - best_known) / |best_known|");
    let mut missing = Vec::new();
    for (si, set) in prm.sets.iter().enumerate() {
        let candidates = [ctx.data_file(&format!("{set}.txt")), ctx.data_file(set)];
        let Some(path) = candidates.iter().find(|p| p.is_file()) else {
            skipped_row(&mut t, &candidates[0]);
            missing.push(candidates[0].clone());
            continue;
        };
        let insts = parse_orlib_qubo_with(&fs::read_to_string(path)?, prm.convention, set)?;
        let starts = prm.starts.get(si).or(prm.starts.last()).copied().unwrap_or(1);
        for inst in insts.iter().take(prm.instances) {
            let seed = derive_seed(ctx.seed, &[0x0b1b, si as u64]);
            let best = best_known(&inst.source_name);
            for split in &prm.splits {
                let p = penalty(inst, split)?;
                for r in solve_all(&p, inst.n, starts, prm.max_iters, &prm.rules, seed, ctx)? {
                    t.push(vec![
                        inst.source_name.as_str().into(),
                        inst.n.into(),
                        split.as_str().into(),
                        r.method.into(),
                        r.starts.into(),
                        r.dirs.into(),
                        best.into(),
                        r.rounded.into(),
                        best.map(|b| gap_pct(r.rounded, b)).into(),
                        r.relaxed.into(),
                        r.iterations.into(),
                        r.descent_ok.into(),
                        r.cpu_s.into(),
                    ]);
                }
            }
        }
    }
    Ok(RecipeOutput { recipe: "qubo-orlib".into(), tables: vec![t], missing })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_known_lookup() {
        assert_eq!(best_known("bqp50.1"), Some(-2098.0));
        assert_eq!(best_known("bqp250.10"), Some(-40442.0));
        assert_eq!(best_known("bqp100.11"), None);
        assert_eq!(best_known("bqp100.0"), None);
        assert_eq!(best_known("gka1"), None);
    }
}
