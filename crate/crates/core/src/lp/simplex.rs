//! Dense two-phase primal simplex method with Bland's rule.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `min cᵀx  s.t.  constraints, x ≥ 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;

struct Tableau {
    rows: usize,
    cols: usize,
    // (rows + 1) × (cols + 1), last row = reduced costs, last column = rhs.
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.cols + 1) + j]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.t[pr * w + pc];
        for j in 0..w {
            self.t[pr * w + j] /= p;
        }
        let prow: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for i in 0..=self.rows {
            if i == pr {
                continue;
            }
            let f = self.t[i * w + pc];
            if f != 0.0 {
                for j in 0..w {
                    self.t[i * w + j] -= f * prow[j];
                }
                self.t[i * w + pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
    }

    /// Runs Bland's rule on allowed columns `< limit`.
    fn optimize(&mut self, limit: usize, max_pivots: usize, pivots: &mut usize) -> Result<()> {
        let obj = self.rows;
        loop {
            let Some(pc) = (0..limit).find(|&j| self.at(obj, j) < -COST_TOL) else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, pc);
                if a > PIVOT_TOL {
                    let ratio = self.at(i, self.cols) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-14 * (1.0 + br.abs())
                                || ((ratio - br).abs() <= 1e-14 * (1.0 + br.abs())
                                    && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((pr, _)) = best else {
                return Err(Error::InvalidInput("linear program is unbounded".into()));
            };
            self.pivot(pr, pc);
            *pivots += 1;
            if *pivots > max_pivots {
                return Err(Error::InvalidInput("simplex pivot limit reached".into()));
            }
        }
    }
}

/// Solves the LP; fails on infeasibility, unboundedness or the pivot cap.
pub fn solve(lp: &LinearProgram, max_pivots: usize) -> Result<LpSolution> {
    let nv = lp.objective.len();
    let m = lp.constraints.len();
    let mut n_slack = 0;
    let mut n_art = 0;
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
    for c in &lp.constraints {
        if c.coeffs.len() != nv {
            return Err(Error::DimensionMismatch { expected: nv, found: c.coeffs.len() });
        }
        let (mut coeffs, mut rel, mut rhs) = (c.coeffs.clone(), c.relation, c.rhs);
        if rhs < 0.0 {
            coeffs.iter_mut().for_each(|v| *v = -*v);
            rhs = -rhs;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        match rel {
            Relation::Le => n_slack += 1,
            Relation::Ge => {
                n_slack += 1;
                n_art += 1
            }
            Relation::Eq => n_art += 1,
        }
        rows.push((coeffs, rel, rhs));
    }
    let cols = nv + n_slack + n_art;
    let w = cols + 1;
    let mut tab = Tableau { rows: m, cols, t: vec![0.0; (m + 1) * w], basis: vec![0; m] };
    let (mut s_next, mut a_next) = (nv, nv + n_slack);
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        tab.t[i * w..i * w + nv].copy_from_slice(coeffs);
        tab.t[i * w + cols] = *rhs;
        match rel {
            Relation::Le => {
                tab.t[i * w + s_next] = 1.0;
                tab.basis[i] = s_next;
                s_next += 1;
            }
            Relation::Ge => {
                tab.t[i * w + s_next] = -1.0;
                s_next += 1;
                tab.t[i * w + a_next] = 1.0;
                tab.basis[i] = a_next;
                a_next += 1;
            }
            Relation::Eq => {
                tab.t[i * w + a_next] = 1.0;
                tab.basis[i] = a_next;
                a_next += 1;
            }
        }
    }
    let mut pivots = 0;
    let art_start = nv + n_slack;
    if n_art > 0 {
        // Phase 1 costs: 1 on artificials, priced out against the basis.
        for i in 0..m {
            if tab.basis[i] >= art_start {
                for j in 0..=cols {
                    if j < art_start || j == cols {
                        tab.t[m * w + j] -= tab.t[i * w + j];
                    }
                }
            }
        }
        tab.optimize(cols, max_pivots, &mut pivots)?;
        let infeas = -tab.at(m, cols);
        let scale = 1.0 + rows.iter().map(|r| r.2).fold(0.0, f64::max);
        if infeas > 1e-9 * scale {
            return Err(Error::InvalidInput(format!("linear program is infeasible ({infeas:e})")));
        }
        // Drive artificials out of the basis where possible.
        for i in 0..m {
            if tab.basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| tab.at(i, j).abs() > 1e-9) {
                    tab.pivot(i, j);
                }
            }
        }
    }
    // Phase 2 costs.
    for j in 0..=cols {
        tab.t[m * w + j] = if j < nv { lp.objective[j] } else { 0.0 };
    }
    for i in 0..m {
        let b = tab.basis[i];
        let cb = tab.t[m * w + b];
        if cb != 0.0 {
            for j in 0..=cols {
                tab.t[m * w + j] -= cb * tab.t[i * w + j];
            }
        }
    }
    tab.optimize(art_start, max_pivots, &mut pivots)?;
    let mut x = vec![0.0; nv];
    for i in 0..m {
        if tab.basis[i] < nv {
            x[tab.basis[i]] = tab.at(i, cols);
        }
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { x, objective, pivots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  → (2, 6), 36
        let lp = LinearProgram {
            objective: vec![-3.0, -5.0],
            constraints: vec![
                Constraint { coeffs: vec![1.0, 0.0], relation: Relation::Le, rhs: 4.0 },
                Constraint { coeffs: vec![0.0, 2.0], relation: Relation::Le, rhs: 12.0 },
                Constraint { coeffs: vec![3.0, 2.0], relation: Relation::Le, rhs: 18.0 },
            ],
        };
        let s = solve(&lp, 1000).unwrap();
        assert!((s.objective + 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y s.t. x + y = 1, x ≥ 0.25 → (1, 0)
        let lp = LinearProgram {
            objective: vec![1.0, 2.0],
            constraints: vec![
                Constraint { coeffs: vec![1.0, 1.0], relation: Relation::Eq, rhs: 1.0 },
                Constraint { coeffs: vec![1.0, 0.0], relation: Relation::Ge, rhs: 0.25 },
            ],
        };
        let s = solve(&lp, 1000).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        let lp = LinearProgram {
            objective: vec![1.0],
            constraints: vec![
                Constraint { coeffs: vec![1.0], relation: Relation::Le, rhs: 1.0 },
                Constraint { coeffs: vec![1.0], relation: Relation::Ge, rhs: 2.0 },
            ],
        };
        assert!(solve(&lp, 1000).is_err());
    }
}
