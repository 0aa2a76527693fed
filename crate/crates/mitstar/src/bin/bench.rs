//! Benchmark CLI: seeded campaigns over the built-in scenario families
//! (or a custom scenario JSON) and summary statistics for existing runs.

use clap::{Args, Parser, Subcommand};
use mitstar::bench::{
    compute_stats, emit_outputs, records_from_csv, resolve_workers, run_campaign, CampaignSpec,
    ScenarioSource,
};
use mitstar::planner::{ClockMode, PlannerVariant};
use mitstar::space::{ProblemDef, ScenarioFamily};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "bench",
    version,
    about = "Motion-planner benchmark harness",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign and write runs.csv, stats.json, and SVG plots.
    Run(RunArgs),
    /// Recompute stats.json from an existing runs.csv.
    Stats(StatsArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario family (required unless --scenario-file is given).
    #[arg(long, value_parser = ["fg", "rr", "dw", "ge"])]
    scenario: Option<String>,
    /// State dimension (required unless --scenario-file is given).
    #[arg(long)]
    dim: Option<usize>,
    /// Planner variant; repeat the flag to compare several.
    #[arg(long = "planner", required = true, value_parser = [
        "mitstar", "mitstar-eis", "mitstar-as", "mitstar-sc", "baseline-off", "rrt-connect",
    ])]
    planner: Vec<String>,
    /// Runs per planner.
    #[arg(long)]
    runs: usize,
    /// Per-run time budget in seconds (see --clock).
    #[arg(long = "max-time")]
    max_time: f64,
    /// Base seed; run and instance seeds derive from it.
    #[arg(long)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to available cores. The BENCH_WORKERS
    /// environment variable overrides this flag.
    #[arg(long)]
    workers: Option<usize>,
    /// Custom scenario JSON instead of a built-in family.
    #[arg(long = "scenario-file")]
    scenario_file: Option<PathBuf>,
    /// Clock driving the budget: deterministic work-based virtual seconds,
    /// or wall time.
    #[arg(long, default_value = "virtual", value_parser = ["virtual", "wall"])]
    clock: String,
}

#[derive(Args)]
struct StatsArgs {
    /// Input runs.csv.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output stats.json.
    #[arg(long)]
    out: PathBuf,
}

fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "inf".to_string()
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Box<dyn std::error::Error>> {
    let clock_mode = match args.clock.as_str() {
        "wall" => ClockMode::Wall,
        _ => ClockMode::Virtual,
    };
    let (source, scenario_label, dim) = match (&args.scenario_file, &args.scenario, args.dim) {
        (Some(path), scenario, dim) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            let problem = ProblemDef::from_json_str(&text)?;
            if let Some(d) = dim {
                if d != problem.dim {
                    return Err(format!(
                        "--dim {d} conflicts with scenario file dimension {}",
                        problem.dim
                    )
                    .into());
                }
            }
            let label = scenario.clone().unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "custom".to_string())
            });
            let dim = problem.dim;
            (ScenarioSource::Custom(problem), label, dim)
        }
        (None, Some(scenario), Some(dim)) => {
            let family: ScenarioFamily = scenario.parse()?;
            (ScenarioSource::Family(family), scenario.clone(), dim)
        }
        _ => {
            return Err(
                "either --scenario-file or both --scenario and --dim are required".into(),
            )
        }
    };
    let planners = args
        .planner
        .iter()
        .map(|p| p.parse::<PlannerVariant>())
        .collect::<Result<Vec<_>, _>>()?;
    let spec = CampaignSpec {
        scenario_label,
        source,
        dim,
        planners,
        runs: args.runs,
        max_time: args.max_time,
        base_seed: args.seed,
        workers: resolve_workers(args.workers),
        clock_mode,
    };
    let records = run_campaign(&spec)?;
    let stats = compute_stats(&records);
    let written = emit_outputs(&records, &stats, &args.out)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    for g in &stats.groups {
        println!(
            "{}-r{} {}: success {:.0}%, median t_init {} s, median c_init {}, median c_final {}",
            g.scenario,
            g.dim,
            g.planner,
            g.success_rate * 100.0,
            fmt_float(g.t_init.median),
            fmt_float(g.c_init.median),
            fmt_float(g.c_final.median),
        );
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| format!("{}: {e}", args.input.display()))?;
    let records = records_from_csv(&text)?;
    let stats = compute_stats(&records);
    let json = serde_json::to_string_pretty(&mitstar::bench::stats_to_json(&stats))?;
    std::fs::write(&args.out, format!("{json}\n"))
        .map_err(|e| format!("{}: {e}", args.out.display()))?;
    println!("wrote {} ({} groups)", args.out.display(), stats.groups.len());
    Ok(())
}

fn main() {
    let result = match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Stats(args) => cmd_stats(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
