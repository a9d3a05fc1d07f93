use std::process::{Command, Output};

fn radca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radca")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn list_shows_every_recipe() {
    let o = radca(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["trap", "nearactive", "qubo-micro", "qubo-orlib"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
    assert!(text.lines().any(|l| l.starts_with("support") && l.ends_with("[data]")));
}

#[test]
fn run_prints_csv_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = radca(&["run", "trap", "--seed", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().count() > 1);
    assert!(out.join("trap.csv").is_file());
    assert!(out.join("trap.manifest.json").is_file());
    let again = radca(&["run", "trap", "--seed", "2"]);
    assert_eq!(std::fs::read_to_string(out.join("trap.csv")).unwrap().lines().count(), stdout(&again).lines().count());
}

#[test]
fn config_files_set_recipe_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("micro.toml");
    std::fs::write(&cfg, "[recipe]\nn = 6\ninstances = 2\nstarts = 2\n").unwrap();
    let o = radca(&["run", "qubo-micro", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::write(&cfg, "[recipe]\nbogus = 1\n").unwrap();
    assert_eq!(radca(&["run", "qubo-micro", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn exit_codes_distinguish_errors_from_missing_data() {
    assert_eq!(radca(&["run", "no-such-recipe"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let o = radca(&["run", "support", "--data", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("skipped: missing file"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing data file"));
    let o = radca(&["oracle", "qubo", "--file", dir.path().join("bqp50.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn oracles_print_reference_tables() {
    let o = radca(&["oracle", "qubo", "--n", "8", "--seed", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[1], "8");
    assert!(fields[2].parse::<f64>().is_ok());
    assert_eq!(fields[3].len(), 8);

    let o = radca(&["oracle", "best-known"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("bqp50.1,-2098"));
    assert!(text.contains("bqp250.10,-40442"));
}
