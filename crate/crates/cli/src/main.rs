use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use radca::experiments::{best_known, run_recipe, write_outputs, Table, BQP_BEST_KNOWN, RECIPES};
use radca::experiments::RecipeContext;
use radca::instances::{parse_orlib_qubo_with, random_qubo, OrlibConvention};
use radca::oracles::oracle_enumerate_qubo;

const EXIT_RECIPE: u8 = 2;
const EXIT_MISSING_DATA: u8 = 3;

#[derive(Parser)]
#[command(name = "radca", version, about = "Randomized active-set DCA benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment recipe and print its main table as CSV.
    Run {
        recipe: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write every table and a manifest here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory holding LIBSVM and OR-Library files.
        #[arg(long)]
        data: Option<PathBuf>,
        /// TOML file with `[solver]` and `[recipe]` sections.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Print every table, not just the main one.
        #[arg(long)]
        all: bool,
    },
    /// List the available recipes.
    List,
    /// Brute-force reference values.
    Oracle {
        name: OracleName,
        /// OR-Library file for `qubo`; otherwise a random instance is drawn.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Halve off-diagonal OR-Library entries.
        #[arg(long)]
        single_count: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleName {
    /// Exact QUBO minimum by enumeration (n <= 22).
    Qubo,
    /// Best-known bqp values.
    BestKnown,
}

enum Outcome {
    Done,
    MissingData(Vec<PathBuf>),
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::List => {
            for r in RECIPES {
                let tag = if r.data_dependent { " [data]" } else { "" };
                println!("{:<16}{}{tag}", r.name, r.summary);
            }
            Ok(Outcome::Done)
        }
        Command::Run { recipe, seed, out, data, config, threads, all } => {
            if let Some(t) = threads {
                rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("thread pool")?;
            }
            let ctx = match &config {
                Some(p) => {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    RecipeContext::from_toml(&text, seed, data)?
                }
                None => RecipeContext { seed, data_dir: data, ..RecipeContext::default() },
            };
            let output = run_recipe(&recipe, &ctx)?;
            let shown = if all { &output.tables[..] } else { &output.tables[..1] };
            for (i, t) in shown.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                if all {
                    println!("# table: {}", t.name);
                }
                print!("{}", t.to_csv(true));
            }
            if let Some(dir) = out {
                for p in write_outputs(&dir, &output, &ctx)? {
                    eprintln!("wrote {}", p.display());
                }
            }
            if output.missing.is_empty() {
                Ok(Outcome::Done)
            } else {
                Ok(Outcome::MissingData(output.missing))
            }
        }
        Command::Oracle { name: OracleName::Qubo, file, n, seed, single_count } => {
            let insts = match &file {
                Some(p) => {
                    if !p.is_file() {
                        return Ok(Outcome::MissingData(vec![p.clone()]));
                    }
                    let conv = if single_count { OrlibConvention::SingleCount } else { OrlibConvention::Symmetric };
                    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("orlib");
                    parse_orlib_qubo_with(&fs::read_to_string(p)?, conv, stem)?
                }
                None => vec![random_qubo(n, seed)?],
            };
            let mut t = Table::new("qubo", &["instance", "n", "optimum", "z"]);
            for inst in &insts {
                let (z, v) = oracle_enumerate_qubo(&inst.q)?;
                let bits: String = z.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
                t.push(vec![inst.source_name.as_str().into(), inst.n.into(), v.into(), bits.into()]);
            }
            print!("{}", t.to_csv(true));
            Ok(Outcome::Done)
        }
        Command::Oracle { name: OracleName::BestKnown, .. } => {
            let mut t = Table::new("best-known", &["instance", "best_known"]);
            for (set, vals) in BQP_BEST_KNOWN {
                for i in 1..=vals.len() {
                    let name = format!("{set}.{i}");
                    let Some(v) = best_known(&name) else { bail!("no value for {name}") };
                    t.push(vec![name.into(), v.into()]);
                }
            }
            print!("{}", t.to_csv(true));
            Ok(Outcome::Done)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::MissingData(paths)) => {
            for p in paths {
                eprintln!("radca: missing data file {}", p.display());
            }
            ExitCode::from(EXIT_MISSING_DATA)
        }
        Err(e) => {
            eprintln!("radca: {e:#}");
            ExitCode::from(EXIT_RECIPE)
        }
    }
}
