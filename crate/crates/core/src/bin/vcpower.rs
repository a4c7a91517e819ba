use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vcpower::config::ScenarioConfig;
use vcpower::harness::{self, HarnessError, SavingsRow};
use vcpower::optimizer::export_lp;
use vcpower::strategies::{build_assignment_milp, Strategy};
use vcpower::workload::{sample_tasks, SweepKind};

#[derive(Parser)]
#[command(name = "vcpower", version, about = "Power-minimizing task assignment over cloud, fog and vehicular tiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run demand sweeps and write results, savings, plot data and a manifest.
    Run {
        /// Scenario JSON; the built-in defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Sweeps to run (traffic, processing); defaults to the config's list.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<SweepKind>,
        /// Comma-separated strategy names; defaults to the config's list.
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<Strategy>,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Branch-and-bound node budget for cfv_single.
        #[arg(long)]
        single_max_nodes: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the MILP a strategy would solve for the config's workload, in LP format.
    LpDump {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute the savings table from a results CSV.
    Savings {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(config: Option<&Path>) -> Result<ScenarioConfig, Box<dyn std::error::Error>> {
    Ok(match config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    })
}

fn print_savings(rows: &[SavingsRow]) {
    println!("{:<11} {:<16} {:>8} {:>12} {:>16}", "sweep", "strategy", "samples", "vs_cloud_%", "vs_cf_optimal_%");
    for r in rows {
        println!(
            "{:<11} {:<16} {:>8} {:>12.2} {:>16.2}",
            r.sweep.as_str(),
            r.strategy.as_str(),
            r.samples,
            r.vs_cloud_pct,
            r.vs_cf_optimal_pct
        );
    }
}

fn run(command: Command) -> Result<(), Box<dyn std::error::Error>> {
    match command {
        Command::Run {
            config,
            sweep,
            strategies,
            replications,
            seed,
            single_max_nodes,
            out,
        } => {
            let mut cfg = load(config.as_deref())?;
            if !sweep.is_empty() {
                cfg.harness.sweeps = sweep;
            }
            if !strategies.is_empty() {
                cfg.harness.strategies = strategies;
            }
            if let Some(r) = replications {
                cfg.harness.replications = r;
            }
            if let Some(s) = seed {
                cfg.harness.seed = s;
            }
            if single_max_nodes.is_some() {
                cfg.harness.single_max_nodes = single_max_nodes;
            }
            cfg.validate()?;
            let result = harness::run_all(&cfg)?;
            harness::write_outputs(&cfg, &result, &out)?;
            for f in &result.failures {
                eprintln!("failed: {f}");
            }
            let limited = result
                .rows
                .iter()
                .filter(|r| r.status == harness::RowStatus::IterationLimit)
                .count();
            if limited > 0 {
                eprintln!("{limited} rows stopped at the node budget; see bound_gap_w in results.csv");
            }
            match harness::savings_table(&result.rows) {
                Ok(table) => print_savings(&table),
                Err(HarnessError::MissingBaseline { .. }) => {}
                Err(e) => return Err(e.into()),
            }
            println!("wrote {} rows to {}", result.rows.len(), out.join(harness::RESULTS_FILE).display());
        }
        Command::LpDump { config, strategy, out } => {
            let cfg = load(config.as_deref())?;
            let mode = strategy
                .milp_mode()
                .ok_or_else(|| format!("strategy `{strategy}` is procedural and has no MILP"))?;
            let arch = cfg.build()?;
            let tasks = sample_tasks(&cfg.workload)?;
            let model = build_assignment_milp(&arch, &tasks, mode);
            std::fs::write(&out, export_lp(&model.instance)).map_err(|e| format!("{}: {e}", out.display()))?;
            println!(
                "wrote {} variables, {} rows to {}",
                model.instance.num_vars(),
                model.instance.num_constraints(),
                out.display()
            );
        }
        Command::Savings { input, out } => {
            let rows = harness::read_results(&input)?;
            let table = harness::savings_table(&rows)?;
            harness::write_savings(&table, &out)?;
            print_savings(&table);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
