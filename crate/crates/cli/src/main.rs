//! `hamsim`: compile, simulate and compare Hamiltonian simulation protocols.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use hamsim_core::bounds::{bounds_table, BoundQuery};
use hamsim_core::gadget::{synthesize_sequence, tally};
use hamsim_core::harness::{self, output, ExperimentConfig, Problem};
use hamsim_core::pauli::set_dense_limit;

#[derive(Parser, Debug)]
#[command(name = "hamsim", version, about = "Trotter, qDrift and physDrift experiments on small fermionic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment description (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides trials.base_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides outputs.directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Largest register (qubits) allowed for dense linear algebra.
    #[arg(long, global = true)]
    dense_limit: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Compile the first protocol at the first grid point to a sequence file.
    Compile,
    /// Track observables along every configured trajectory.
    Simulate,
    /// Error and cost table over protocols, times, grid and trials.
    Sweep,
    /// Draw counts of a randomized protocol against their expectation.
    Histogram,
    /// Measured errors against closed-form bounds.
    Bounds,
    /// OpenQASM 2.0 circuit of the first protocol at the first grid point.
    QasmExport,
}

fn load(cli: &Cli) -> Result<(ExperimentConfig, Problem)> {
    let path = cli.config.as_deref().context("--config <path> is required")?;
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(seed) = cli.seed {
        cfg.trials.base_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.outputs.directory = out.clone();
    }
    if let Some(limit) = cli.dense_limit {
        set_dense_limit(limit);
    }
    let problem = harness::load_problem(&cfg)?;
    Ok((cfg, problem))
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn first_point(cfg: &ExperimentConfig, problem: &Problem) -> Result<(harness::ProtocolChoice, f64, usize)> {
    let choice = cfg.protocol.names[0];
    let steps = harness::study::resolve_steps(problem, cfg, choice)?[0];
    Ok((choice, cfg.protocol.times[0], steps))
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let (cfg, problem) = load(cli)?;
    let dir: &Path = cfg.output_dir();
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let written = match cli.command {
        Command::Compile => {
            let (choice, t, steps) = first_point(&cfg, &problem)?;
            let seq = harness::compile(&problem, &cfg, choice, t, steps, cfg.trials.base_seed)?;
            let counts = tally(&synthesize_sequence(&seq)?);
            let path = dir.join("sequence.json");
            fs::write(&path, seq.to_json())?;
            let tally_path = dir.join("tally.json");
            fs::write(&tally_path, serde_json::to_string_pretty(&counts)?)?;
            println!(
                "{choice}: {} exponentials, {} CNOTs, {} Rz, depth {}",
                counts.exponential_count, counts.cnot_count, counts.rz_count, counts.depth
            );
            vec![path, tally_path]
        }
        Command::QasmExport => {
            let (choice, t, steps) = first_point(&cfg, &problem)?;
            let seq = harness::compile(&problem, &cfg, choice, t, steps, cfg.trials.base_seed)?;
            let path = dir.join("circuit.qasm");
            fs::write(&path, synthesize_sequence(&seq)?.to_qasm())?;
            vec![path]
        }
        Command::Simulate => {
            let rows = harness::simulate(&problem, &cfg)?;
            output::write_series(dir, &cfg, &rows)?
        }
        Command::Sweep => {
            let rows = harness::sweep(&problem, &cfg)?;
            output::write_sweep(dir, &cfg, &rows)?
        }
        Command::Histogram => {
            let rows = harness::histogram(&problem, &cfg)?;
            let path = dir.join("histogram.csv");
            output::write_histogram(&path, &rows)?;
            vec![path]
        }
        Command::Bounds => {
            let rows = harness::compare_bounds(&problem, &cfg)?;
            let path = dir.join("bounds.csv");
            output::write_bound_comparison(&path, &rows)?;
            let h = &problem.hamiltonian;
            let mut table = Vec::new();
            for &t in &cfg.protocol.times {
                for &n in &cfg.protocol.grid {
                    let q = BoundQuery {
                        t,
                        terms: h.len(),
                        lambda_max: h.lambda_max(),
                        lambda_one: h.lambda_one_norm(),
                        epsilon: cfg.bounds.epsilon,
                        steps: n,
                    };
                    table.extend(bounds_table(&q)?.into_iter().map(|r| (t, n, r)));
                }
            }
            let table_path = dir.join("bounds_table.csv");
            output::write_bounds_table(&table_path, &table)?;
            if rows.iter().any(|r| r.within_bound == Some(false)) {
                eprintln!("warning: some measured errors exceed their rigorous bound");
            }
            vec![path, table_path]
        }
    };
    Ok(written)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let written = run(&cli)?;
    report(&written);
    Ok(())
}
