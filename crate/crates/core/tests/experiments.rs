use std::fs;

use radca::experiments::{run_recipe, write_outputs, Cell, RecipeContext, RECIPES};
use radca::instances::{random_qubo, write_orlib_qubo, OrlibConvention};
use radca::oracles::{naive_enumerate_qubo, naive_qubo_value, oracle_enumerate_qubo};
use radca::Error;

#[test]
fn gray_code_enumeration_matches_naive() {
    for seed in 0..20u64 {
        let n = 1 + seed as usize % 10;
        let q = random_qubo(n, seed).unwrap().q;
        let (z, v) = oracle_enumerate_qubo(&q).unwrap();
        let (_, w) = naive_enumerate_qubo(&q).unwrap();
        assert!((v - w).abs() <= 1e-9 * (1.0 + w.abs()), "seed {seed}: {v} vs {w}");
        assert!((naive_qubo_value(&q, &z) - v).abs() <= 1e-9 * (1.0 + v.abs()));
    }
}

#[test]
fn data_recipes_skip_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = RecipeContext { data_dir: Some(dir.path().into()), ..RecipeContext::with_seed(1) };
    for info in RECIPES.iter().filter(|r| r.data_dependent) {
        let out = run_recipe(info.name, &ctx).unwrap();
        assert!(!out.missing.is_empty(), "{}", info.name);
        let main = &out.tables[0];
        assert!(!main.rows.is_empty());
        for row in &main.rows {
            assert!(row[0].as_str().unwrap().starts_with("skipped: missing file"));
            assert!(row[1..].iter().all(|c| *c == Cell::Missing));
        }
    }
}

#[test]
fn unknown_recipes_and_bad_params_are_errors() {
    let ctx = RecipeContext::with_seed(0);
    assert!(matches!(run_recipe("nope", &ctx), Err(Error::UnknownRecipe(_))));
    assert!(run_recipe("trap", &ctx.clone().param("no_such_key", 3)).is_err());
    assert!(RecipeContext::from_toml("[recipe]\nx = 1\n[extra]\n", 0, None).is_err());
}

#[test]
fn recipes_are_deterministic_given_a_seed() {
    for name in ["trap", "nearactive"] {
        let a = run_recipe(name, &RecipeContext::with_seed(7)).unwrap();
        let b = run_recipe(name, &RecipeContext::with_seed(7)).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint(), "{name}");
        assert!(a.missing.is_empty());
    }
}

#[test]
fn outputs_are_written_with_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = RecipeContext::with_seed(3);
    let out = run_recipe("trap", &ctx).unwrap();
    let paths = write_outputs(dir.path(), &out, &ctx).unwrap();
    assert_eq!(paths.len(), out.tables.len() + 1);
    let main = fs::read_to_string(&paths[0]).unwrap();
    assert!(main.contains(&out.tables[0].columns.join(",")));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(paths.last().unwrap()).unwrap()).unwrap();
    assert_eq!(manifest["recipe"], "trap");
    assert_eq!(manifest["seed"], 3);
}

#[test]
fn orlib_recipe_reads_instances_from_the_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    let insts: Vec<_> = (0..2u64)
        .map(|s| {
            let mut q = random_qubo(10, s).unwrap();
            (q.convention, q.sense_converted) = (OrlibConvention::Symmetric, true);
            q
        })
        .collect();
    fs::write(dir.path().join("tiny.txt"), write_orlib_qubo(&insts)).unwrap();
    let config = "[recipe]\nsets = [\"tiny\"]\ninstances = 2\nsplits = [\"shift\"]\nstarts = [3]\nmax_iters = 30\n";
    let ctx = RecipeContext::from_toml(config, 5, Some(dir.path().into())).unwrap();
    let out = run_recipe("qubo-orlib", &ctx).unwrap();
    assert!(out.missing.is_empty());
    let t = &out.tables[0];
    assert_eq!(t.rows.len(), 2 * 3);
    let rounded = t.floats("rounded").unwrap();
    for (row, r) in t.rows.iter().zip(&rounded) {
        let name = row[0].as_str().unwrap();
        let i: usize = name.strip_prefix("tiny.").unwrap().parse().unwrap();
        let (_, opt) = oracle_enumerate_qubo(&insts[i - 1].q).unwrap();
        assert!(*r >= opt - 1e-9, "{name}: {r} below the optimum {opt}");
        assert_eq!(row[t.column("best_known").unwrap()], Cell::Missing);
    }
    assert!(t.rows.iter().all(|row| row[t.column("descent_ok").unwrap()] == Cell::Bool(true)));
}
