use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::LpConfig;
use crate::sketch::{embedding_budget, SketchKind};
use crate::stationarity::DEFAULT_ENUMERATION_CAP;
use crate::subproblem::ProxConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    Centered,
    RandomVertex,
    FullVertex,
    Ra,
    BlockCentered,
    BlockRandom,
    BlockGreedyFull,
    BlockGreedySketched,
    /// Sketched greedy safeguard with the grouped LP as fallback.
    BlockRa,
}

impl Rule {
    pub fn label(self) -> &'static str {
        match self {
            Rule::Centered => "centered",
            Rule::RandomVertex => "random-vertex",
            Rule::FullVertex => "full-vertex",
            Rule::Ra => "ra",
            Rule::BlockCentered => "block-centered",
            Rule::BlockRandom => "block-random",
            Rule::BlockGreedyFull => "block-greedy-full",
            Rule::BlockGreedySketched => "block-greedy-sketched",
            Rule::BlockRa => "block-ra",
        }
    }

    pub fn is_single_block(self) -> bool {
        matches!(self, Rule::Centered | Rule::RandomVertex | Rule::FullVertex | Rule::Ra)
    }

    pub fn uses_sketch(self) -> bool {
        matches!(self, Rule::Ra | Rule::BlockGreedySketched | Rule::BlockRa)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum EpsSchedule {
    Fixed(f64),
    /// `ε_k = ε₀ / (k+1)^(1+β)`
    Power { eps0: f64, beta: f64 },
}

impl EpsSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match *self {
            EpsSchedule::Fixed(e) => e,
            EpsSchedule::Power { eps0, beta } => eps0 / ((k + 1) as f64).powf(1.0 + beta),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TauSchedule {
    /// `f64::INFINITY` disables the vertex branch.
    Fixed(f64),
    /// `τ_k = τ₀ / √(k+1)`
    InverseSqrt { tau0: f64 },
}

impl TauSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match *self {
            TauSchedule::Fixed(t) => t,
            TauSchedule::InverseSqrt { tau0 } => tau0 / ((k + 1) as f64).sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SketchSize {
    Identity,
    Fixed(usize),
    /// `m = ⌈C η⁻² (d + ln(1/δ_k))⌉` with `δ_k = δ/K` over a finite horizon `K`,
    /// or `δ_k = δ/(k+1)²` when `horizon` is `None`.
    Budget { c: f64, eta: f64, delta: f64, horizon: Option<usize>, dim: Option<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SketchConfig {
    pub kind: SketchKind,
    pub size: SketchSize,
    pub base_seed: u64,
    /// Uses `d_k = min(n, |A_k| + 1)` in the budget instead of the fixed `d`.
    pub adaptive_dim: bool,
}

impl Default for SketchConfig {
    fn default() -> Self {
        Self { kind: SketchKind::GaussianRows, size: SketchSize::Fixed(20), base_seed: 0, adaptive_dim: false }
    }
}

impl SketchConfig {
    /// Rows of the sketch at iteration `k` for an `n`-dimensional program
    /// with `active` candidate columns.
    pub fn rows_at(&self, k: usize, n: usize, active: u128) -> Result<usize> {
        match self.size {
            SketchSize::Identity => Ok(n),
            SketchSize::Fixed(m) => Ok(m),
            SketchSize::Budget { c, eta, delta, horizon, dim } => {
                let d = if self.adaptive_dim {
                    (active.saturating_add(1)).min(n as u128) as usize
                } else {
                    dim.unwrap_or(n)
                };
                let dk = match horizon {
                    Some(kk) => delta / kk.max(1) as f64,
                    None => delta / ((k + 1) as f64).powi(2),
                };
                embedding_budget(d, eta, dk, c)
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        self.kind == SketchKind::Identity || self.size == SketchSize::Identity
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub rule: Rule,
    pub eps: EpsSchedule,
    pub tau: TauSchedule,
    pub sketch: SketchConfig,
    pub prox: ProxConfig,
    pub lp: LpConfig,
    pub max_iters: usize,
    pub stop_step_tol: f64,
    pub stop_residual_tol: f64,
    pub enumeration_cap: u128,
    /// Seed for the random-vertex rules.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rule: Rule::Ra,
            eps: EpsSchedule::Fixed(1e-10),
            tau: TauSchedule::Fixed(1e-10),
            sketch: SketchConfig::default(),
            prox: ProxConfig::default(),
            lp: LpConfig::default(),
            max_iters: 200,
            stop_step_tol: 1e-10,
            stop_residual_tol: 1e-8,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rule = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match self.eps {
            EpsSchedule::Fixed(e) if !(e >= 0.0 && e.is_finite()) => return bad(format!("eps must be >= 0, got {e}")),
            EpsSchedule::Power { eps0, beta } if !(eps0 >= 0.0 && eps0.is_finite() && beta > 0.0) => {
                return bad(format!("power schedule needs eps0 >= 0 and beta > 0, got ({eps0}, {beta})"))
            }
            _ => {}
        }
        match self.tau {
            TauSchedule::Fixed(t) if !(t >= 0.0) => return bad(format!("tau must be >= 0, got {t}")),
            TauSchedule::InverseSqrt { tau0 } if !(tau0 >= 0.0 && tau0.is_finite()) => {
                return bad(format!("tau0 must be >= 0, got {tau0}"))
            }
            _ => {}
        }
        if !(self.stop_step_tol > 0.0) || !(self.stop_residual_tol > 0.0) {
            return bad("stopping tolerances must be positive".into());
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1".into());
        }
        if let SketchSize::Fixed(0) = self.sketch.size {
            return bad("sketch needs at least one row".into());
        }
        Ok(())
    }
}
