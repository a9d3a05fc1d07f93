//! Experiment recipes that regenerate the benchmark tables at desk scale.
//!
//! Every recipe is deterministic given its seed and parameters. Timing lives
//! only in columns ending in `cpu_s`.

mod blocks;
mod qubo;
mod synthetic;
mod table;

pub use qubo::{best_known, BQP_BEST_KNOWN};
pub use table::{max, mean, min, Cell, Table, TIME_SUFFIX};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::driver::{RunHistory, SketchConfig, SketchSize, SolverConfig};
use crate::error::{Error, Result};
use crate::lp::LpConfig;
use crate::sketch::SketchKind;
use crate::subproblem::ProxConfig;

/// Solver settings a config file may override for every run of a recipe.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOverrides {
    pub max_iters: Option<usize>,
    pub stop_step_tol: Option<f64>,
    pub stop_residual_tol: Option<f64>,
    pub enumeration_cap: Option<u64>,
    pub sketch_kind: Option<SketchKind>,
    pub prox: Option<ProxConfig>,
    pub lp: Option<LpConfig>,
}

impl SolverOverrides {
    pub fn apply(&self, cfg: &mut SolverConfig) {
        if let Some(v) = self.max_iters {
            cfg.max_iters = v;
        }
        if let Some(v) = self.stop_step_tol {
            cfg.stop_step_tol = v;
        }
        if let Some(v) = self.stop_residual_tol {
            cfg.stop_residual_tol = v;
        }
        if let Some(v) = self.enumeration_cap {
            cfg.enumeration_cap = v as u128;
        }
        if let Some(k) = self.sketch_kind {
            if cfg.sketch.kind != SketchKind::Identity {
                cfg.sketch.kind = k;
            }
        }
        if let Some(p) = &self.prox {
            cfg.prox = p.clone();
        }
        if let Some(l) = &self.lp {
            cfg.lp = l.clone();
        }
    }
}

/// Everything a recipe may read besides its name.
#[derive(Clone, Debug, Default)]
pub struct RecipeContext {
    pub seed: u64,
    pub data_dir: Option<PathBuf>,
    /// Recipe parameters (the `[recipe]` table of a config file).
    pub params: toml::Table,
    pub solver: SolverOverrides,
}

impl RecipeContext {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn param(mut self, key: &str, value: impl Into<toml::Value>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    /// Parses the `[solver]` and `[recipe]` sections of a TOML config.
    pub fn from_toml(text: &str, seed: u64, data_dir: Option<PathBuf>) -> Result<Self> {
        #[derive(Deserialize, Default)]
        #[serde(default, deny_unknown_fields)]
        struct File {
            solver: SolverOverrides,
            recipe: toml::Table,
        }
        let f: File = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self { seed, data_dir, params: f.recipe, solver: f.solver })
    }

    fn params_as<T: DeserializeOwned>(&self) -> Result<T> {
        toml::Value::Table(self.params.clone())
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("recipe parameters: {}", e.message())))
    }

    fn data_file(&self, name: &str) -> PathBuf {
        self.data_dir.as_deref().unwrap_or_else(|| Path::new(".")).join(name)
    }

    fn solver(&self, mut cfg: SolverConfig) -> SolverConfig {
        self.solver.apply(&mut cfg);
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecipeOutput {
    pub recipe: String,
    /// The first table is the recipe's main table.
    pub tables: Vec<Table>,
    /// Data files that were not found.
    pub missing: Vec<PathBuf>,
}

impl RecipeOutput {
    pub fn table(&self, name: &str) -> Result<&Table> {
        self.tables
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::InvalidInput(format!("recipe {} has no table `{name}`", self.recipe)))
    }

    /// Concatenated CSV of all tables without timing columns.
    pub fn fingerprint(&self) -> String {
        self.tables.iter().map(|t| format!("[{}]\n{}", t.name, t.to_csv(false))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RecipeInfo {
    pub name: &'static str,
    pub summary: &'static str,
    /// Needs files under `--data`.
    pub data_dependent: bool,
}

pub const RECIPES: &[RecipeInfo] = &[
    RecipeInfo { name: "trap", summary: "one-dimensional critical-point trap", data_dependent: false },
    RecipeInfo { name: "maxaffine", summary: "signed-pair max-affine instances", data_dependent: false },
    RecipeInfo { name: "sketchsize", summary: "sampled-direction count vs vertex quality", data_dependent: false },
    RecipeInfo { name: "maxquad", summary: "signed-pair max-quadratic instances", data_dependent: false },
    RecipeInfo { name: "worst-iterate", summary: "worst-iterate residual bound with D = I", data_dependent: false },
    RecipeInfo { name: "nearactive", summary: "near-active LP fallback diagnostic", data_dependent: false },
    RecipeInfo { name: "lpbackend", summary: "exact LP vs projected fallback", data_dependent: false },
    RecipeInfo { name: "embedding", summary: "embedding budgets and sketch distortion", data_dependent: false },
    RecipeInfo { name: "criticality", summary: "criticality distance vs residual", data_dependent: false },
    RecipeInfo { name: "topk-synthetic", summary: "greedy aggregate screening on sparse data", data_dependent: false },
    RecipeInfo { name: "lcp", summary: "sparse LCP complementarity penalty", data_dependent: false },
    RecipeInfo { name: "qubo-micro", summary: "small random QUBO vs enumeration", data_dependent: false },
    RecipeInfo { name: "support", summary: "LIBSVM support-function model", data_dependent: true },
    RecipeInfo { name: "topk", summary: "LIBSVM top-k support model", data_dependent: true },
    RecipeInfo { name: "trimmed", summary: "LIBSVM trimmed ridge regression", data_dependent: true },
    RecipeInfo { name: "qubo-orlib", summary: "OR-Library bqp instances", data_dependent: true },
];

pub fn run_recipe(name: &str, ctx: &RecipeContext) -> Result<RecipeOutput> {
    let tables = match name {
        "trap" => synthetic::trap(ctx)?,
        "maxaffine" => synthetic::signed_pairs(ctx, None)?,
        "maxquad" => synthetic::signed_pairs(ctx, Some(0.25))?,
        "sketchsize" => synthetic::sketchsize(ctx)?,
        "worst-iterate" => synthetic::worst_iterate(ctx)?,
        "nearactive" => synthetic::nearactive(ctx)?,
        "lpbackend" => synthetic::lpbackend(ctx)?,
        "embedding" => synthetic::embedding(ctx)?,
        "criticality" => synthetic::criticality(ctx)?,
        "topk-synthetic" => blocks::topk_synthetic(ctx)?,
        "lcp" => blocks::lcp(ctx)?,
        "qubo-micro" => qubo::micro(ctx)?,
        "support" | "topk" | "trimmed" => return blocks::libsvm(name, ctx),
        "qubo-orlib" => return qubo::orlib(ctx),
        other => return Err(Error::UnknownRecipe(other.into())),
    };
    Ok(RecipeOutput { recipe: name.into(), tables, missing: Vec::new() })
}

#[derive(Serialize)]
struct Manifest<'a> {
    recipe: &'a str,
    version: &'static str,
    seed: u64,
    data_dir: Option<String>,
    params: &'a toml::Table,
    solver: &'a SolverOverrides,
    tables: BTreeMap<String, (usize, Vec<String>)>,
    missing: Vec<String>,
}

/// Writes `<recipe>.csv` (main table), `<recipe>-<table>.csv` for the rest,
/// and `<recipe>.manifest.json`. Returns the written paths.
pub fn write_outputs(dir: &Path, out: &RecipeOutput, ctx: &RecipeContext) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (i, t) in out.tables.iter().enumerate() {
        let file = if i == 0 { format!("{}.csv", out.recipe) } else { format!("{}-{}.csv", out.recipe, t.name) };
        let p = dir.join(file);
        fs::write(&p, t.to_csv(true))?;
        paths.push(p);
    }
    let manifest = Manifest {
        recipe: &out.recipe,
        version: env!("CARGO_PKG_VERSION"),
        seed: ctx.seed,
        data_dir: ctx.data_dir.as_ref().map(|d| d.display().to_string()),
        params: &ctx.params,
        solver: &ctx.solver,
        tables: out.tables.iter().map(|t| (t.name.clone(), (t.rows.len(), t.columns.clone()))).collect(),
        missing: out.missing.iter().map(|p| p.display().to_string()).collect(),
    };
    let p = dir.join(format!("{}.manifest.json", out.recipe));
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::InvalidInput(e.to_string()))?;
    fs::write(&p, json + "\n")?;
    paths.push(p);
    Ok(paths)
}

/// Finite-horizon budget `C = 1, η = 0.8, δ = 0.05` with `d = n`.
fn budget_sketch(horizon: usize, base_seed: u64) -> SketchConfig {
    SketchConfig {
        kind: SketchKind::GaussianRows,
        size: SketchSize::Budget { c: 1.0, eta: 0.8, delta: 0.05, horizon: Some(horizon), dim: None },
        base_seed,
        adaptive_dim: false,
    }
}

fn fixed_sketch(m: usize, base_seed: u64) -> SketchConfig {
    SketchConfig { kind: SketchKind::GaussianRows, size: SketchSize::Fixed(m), base_seed, adaptive_dim: false }
}

fn status_label(h: &RunHistory) -> &'static str {
    match h.status {
        crate::driver::Status::Converged => "converged",
        crate::driver::Status::MaxIters => "max-iters",
        crate::driver::Status::Flagged => "flagged",
    }
}

fn skipped_row(table: &mut Table, path: &Path) {
    let mut row = vec![Cell::Missing; table.columns.len()];
    row[0] = Cell::Str(format!("skipped: missing file {}", path.display()));
    table.push(row);
}
