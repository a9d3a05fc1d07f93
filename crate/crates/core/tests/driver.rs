mod common;

use common::{bounded, build, random_point, random_raw};
use radca::driver::{
    exact_residual, multistart, run, worst_iterate_diagnostic, BranchKind, ResidualKind, Rule, RunHistory, SketchConfig,
    SketchSize, SolverConfig, Status,
};
use radca::instances::{
    build_qubo_penalty, dc_split_shift, gen_lcp, gen_signed_pair_affine, gen_signed_pair_quadratic, one_d_trap,
    qubo_starts, random_qubo,
};
use radca::model::DcProgram;
use radca::sketch::SketchKind;
use radca::subproblem::descent_check;

const SINGLE: [Rule; 4] = [Rule::Centered, Rule::RandomVertex, Rule::FullVertex, Rule::Ra];
const BLOCK: [Rule; 5] =
    [Rule::BlockCentered, Rule::BlockRandom, Rule::BlockGreedyFull, Rule::BlockGreedySketched, Rule::BlockRa];

fn cfg(rule: Rule, seed: u64) -> SolverConfig {
    let mut c = SolverConfig::default().with_rule(rule);
    c.seed = seed;
    c.sketch.base_seed = seed ^ 0x5eed;
    c.sketch.size = SketchSize::Fixed(6);
    c.max_iters = 60;
    c
}

/// Programs paired with the rules that apply to them and a start.
fn cases() -> Vec<(DcProgram, Vec<Rule>, Vec<f64>)> {
    let mut out = Vec::new();
    for seed in 0..12u64 {
        let n = 5 + seed as usize % 6;
        out.push((gen_signed_pair_affine(n, 2 * n, seed).unwrap(), SINGLE.to_vec(), vec![0.0; n]));
        out.push((gen_signed_pair_quadratic(n, 2 * n, 0.2, seed).unwrap(), SINGLE.to_vec(), random_point(seed, n, 0.1)));
        let raw = bounded(random_raw(seed + 100, 6));
        let rules = if raw.blocks.len() == 1 { [SINGLE.to_vec(), BLOCK.to_vec()].concat() } else { BLOCK.to_vec() };
        out.push((build(&raw), rules, random_point(seed, raw.n, 1.0)));
    }
    for seed in 0..4u64 {
        let lcp = gen_lcp(12, 3, seed).unwrap();
        out.push((lcp.program.clone(), BLOCK.to_vec(), vec![0.5; 12]));
        let q = random_qubo(8, seed).unwrap();
        let p = build_qubo_penalty(&dc_split_shift(&q.q).unwrap(), 1.0).unwrap();
        out.push((p, BLOCK.to_vec(), qubo_starts(8, 1, seed).remove(0)));
    }
    out
}

fn same_trajectory(a: &RunHistory, b: &RunHistory) -> bool {
    a.records == b.records
        && a.x_final.iter().map(|v| v.to_bits()).eq(b.x_final.iter().map(|v| v.to_bits()))
        && a.status == b.status
        && a.rounded == b.rounded
}

#[test]
fn histories_descend_obey_the_safeguard_and_rerun_identically() {
    let mut iterations = 0;
    for (ci, (p, rules, x0)) in cases().iter().enumerate() {
        for &rule in rules {
            let c = cfg(rule, ci as u64);
            let h = run(p, x0, &c).unwrap();
            assert!(h.all_descent_ok(), "case {ci} {rule:?}");
            for (k, r) in h.records.iter().enumerate() {
                assert!(descent_check(r.objective, r.next_objective, r.step_norm, r.slack, h.mu));
                if let Some(next) = h.records.get(k + 1) {
                    assert_eq!(r.next_objective.to_bits(), next.objective.to_bits());
                }
                if matches!(rule, Rule::Ra | Rule::BlockRa) {
                    let r_hat = r.r_hat.unwrap();
                    match r.branch {
                        BranchKind::Vertex => assert!(r_hat > r.tau_k && !r.lp_called),
                        BranchKind::Combination => assert!(r_hat <= r.tau_k),
                    }
                }
            }
            assert_eq!(h.x0, *x0);
            assert!(same_trajectory(&h, &run(p, x0, &c).unwrap()), "case {ci} {rule:?} not reproducible");
            iterations += h.iterations();
        }
    }
    assert!(iterations > 1000);
}

#[test]
fn converged_runs_meet_the_stop_rule() {
    let mut converged = 0;
    for (ci, (p, rules, x0)) in cases().iter().enumerate() {
        for &rule in rules {
            let mut c = cfg(rule, ci as u64);
            c.max_iters = 300;
            let h = match run(p, x0, &c) { Ok(h) => h, Err(e) => panic!("case {ci} {rule:?}: {e}") };
            if h.status != Status::Converged {
                continue;
            }
            converged += 1;
            let last = h.records.last().unwrap();
            assert!(last.step_norm <= c.stop_step_tol);
            if last.r_exact_kind == ResidualKind::Exact {
                assert!(last.r_exact <= c.stop_residual_tol, "case {ci} {rule:?}: {}", last.r_exact);
            }
            let (rf, kind) = exact_residual(p, &h.x_final, c.enumeration_cap).unwrap();
            assert_eq!((rf, kind), (h.final_residual, h.final_residual_kind));
            if kind == ResidualKind::Exact {
                assert!(rf <= c.stop_residual_tol, "case {ci} {rule:?}: final residual {rf}");
            }
        }
    }
    assert!(converged >= 20, "only {converged} converged runs");
}

#[test]
fn full_space_residual_bound_holds_every_iteration() {
    let mut checked = 0;
    for (ci, (p, rules, x0)) in cases().iter().enumerate() {
        for &rule in rules.iter().filter(|r| matches!(r, Rule::Ra | Rule::BlockRa)) {
            let mut c = cfg(rule, ci as u64);
            c.sketch = SketchConfig { kind: SketchKind::Identity, size: SketchSize::Identity, ..c.sketch };
            let h = run(p, x0, &c).unwrap();
            let c_eta = p.g().lipschitz() + h.sigma;
            if rule == Rule::Ra {
                let rep = worst_iterate_diagnostic(&h, 0.0, p.g().lipschitz(), h.sigma, h.mu, None);
                assert_eq!(rep.c_eta, c_eta);
                assert_eq!(rep.violations, 0, "case {ci}");
                assert!(rep.ergodic_ok);
                checked += rep.checked;
            } else if p.bounds().is_none() {
                // The greedy aggregate need not be the worst vertex, so only its
                // own residual is bounded by the step. Box clipping shortens the
                // step, so boxed programs are left out.
                for r in h.records.iter().filter(|r| r.branch == BranchKind::Vertex) {
                    let bound = c_eta * r.step_norm + r.sub_error;
                    assert!(r.r_hat.unwrap() <= bound + 1e-9 * (1.0 + bound), "case {ci} k={}", r.k);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 100, "{checked}");
}

#[test]
fn trap_separates_centered_from_vertex_rules() {
    let p = one_d_trap();
    let centered = run(&p, &[0.0], &cfg(Rule::Centered, 0)).unwrap();
    assert_eq!(centered.x_final, vec![0.0]);
    assert_eq!(centered.final_residual, 1.0);
    for rule in [Rule::FullVertex, Rule::Ra] {
        let h = run(&p, &[0.0], &cfg(rule, 0)).unwrap();
        assert_eq!(h.status, Status::Converged);
        assert!((h.x_final[0].abs() - 1.0).abs() <= 1e-12);
        assert!((h.final_objective + 0.5).abs() <= 1e-12);
    }
}

#[test]
fn multistart_picks_the_best_and_is_order_stable() {
    let q = random_qubo(10, 4).unwrap();
    let p = build_qubo_penalty(&dc_split_shift(&q.q).unwrap(), 1.0).unwrap();
    let xs = qubo_starts(10, 6, 9);
    let c = cfg(Rule::BlockRa, 3);
    let (best, runs) = multistart(&p, &xs, &c).unwrap();
    assert_eq!(runs.len(), 6);
    assert!(runs.iter().all(|r| r.score() >= runs[best].score()));
    assert!(runs.iter().enumerate().all(|(i, r)| r.start == i));
    let (best2, runs2) = multistart(&p, &xs, &c).unwrap();
    assert_eq!(best, best2);
    assert!(runs.iter().zip(&runs2).all(|(a, b)| same_trajectory(a, b)));
}

#[test]
fn rules_reject_mismatched_programs() {
    let raw = random_raw(5, 4);
    let mut two = raw.clone();
    two.blocks = vec![raw.blocks[0].clone(), raw.blocks[0].clone()];
    let p = build(&two);
    assert!(run(&p, &vec![0.0; raw.n], &cfg(Rule::Ra, 0)).is_err());
    let q = build_qubo_penalty(&dc_split_shift(&random_qubo(4, 1).unwrap().q).unwrap(), 1.0).unwrap();
    assert!(run(&q, &[2.0, 0.0, 0.0, 0.0], &cfg(Rule::BlockRa, 0)).is_err());
}
