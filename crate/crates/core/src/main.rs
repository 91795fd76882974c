use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use scout_duel::bench::{self, MapSource, SuccessSpec, SweepSpec};
use scout_duel::game::{Mode, RewardModel, Scenario};
use scout_duel::gridworld::{Coord, GridMap};
use scout_duel::mcts::{mcts_search, MctsConfig};
use scout_duel::minimax::{minimax_search, ChildOrder, PruningLevel, SearchConfig};
use scout_duel::oracle::{brute_force_value, OracleError};
use scout_duel::par::{self, Execution};
use scout_duel::report::{self, Outcome, ResolvedConfig, RunRecord, TraceSource};
use scout_duel::value::{format_value, parse_value, Value};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_ALARM: u8 = 4;

#[derive(Parser)]
#[command(name = "scout-duel", version, about = "Scout-versus-guard visibility planning solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and print a run record.
    Solve(SolveArgs),
    /// Shorthand for `solve --algo oracle`.
    Oracle(SolveArgs),
    /// Run an experiment sweep and write CSV/JSON files.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Minimax,
    Mcts,
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    horizon: u32,
    /// Integer, decimal or `p/q`.
    #[arg(long)]
    penalty: String,
    #[arg(long, value_enum, default_value = "scout")]
    mode: ModeArg,
    /// Goal cell as `ROW,COL` (goal mode only).
    #[arg(long)]
    goal: Option<String>,
    #[arg(long, value_enum)]
    algo: Option<Algo>,
    /// none, ab, bounds or all.
    #[arg(long)]
    prune: Option<PruningLevel>,
    /// Enable history pruning.
    #[arg(long)]
    history: bool,
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long)]
    c: Option<f64>,
    /// MCTS seed, or child-order seed for minimax.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Include wall-clock time in the output.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Scout,
    Goal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sweep {
    NodeCount,
    SuccessFraction,
    PenaltyDemo,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    sweep: Sweep,
    #[arg(long)]
    out: PathBuf,
    /// Fixed map; otherwise maps are generated from the seed.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    width: usize,
    #[arg(long, default_value_t = 6)]
    height: usize,
    #[arg(long, default_value_t = 0.15)]
    density: f64,
    #[arg(long, value_delimiter = ',')]
    horizons: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', default_value = "3")]
    penalties: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "none,ab,bounds")]
    prune: Vec<PruningLevel>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cross-check every node-count instance against the brute-force oracle.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_delimiter = ',', default_value = "1,10,30,100,300,1000")]
    budgets: Vec<u64>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    history: bool,
    #[arg(long, default_value = "3")]
    p_low: String,
    #[arg(long, default_value = "30")]
    p_high: String,
    #[arg(long)]
    timing: bool,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn internal(message: impl ToString) -> Self {
        Failure { code: EXIT_FAILURE, message: message.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = par::with_threads(par::threads_from_env(), || match cli.command {
        Command::Solve(args) => solve(args, None),
        Command::Oracle(args) => solve(args, Some(Algo::Oracle)),
        Command::Bench(args) => run_bench(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_map(path: &Path) -> Result<GridMap, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::internal(format!("{}: {e}", path.display())))?;
    GridMap::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn penalty(text: &str) -> Result<Value, Failure> {
    parse_value(text).map_err(|e| Failure::usage(format!("penalty: {e}")))
}

fn parse_goal(map: &GridMap, text: &str) -> Result<Coord, Failure> {
    let bad = || Failure::usage(format!("--goal expects ROW,COL, got {text:?}"));
    let (r, c) = text.split_once(',').ok_or_else(bad)?;
    let coord = Coord::new(r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?);
    map.cell_at(coord).map_err(|e| Failure::usage(format!("--goal: {e}")))?;
    Ok(coord)
}

fn check_flags(args: &SolveArgs, algo: Algo) -> Result<(), Failure> {
    let conflict = |flag: &str| Failure::usage(format!("{flag} cannot be used with this algorithm"));
    if algo != Algo::Mcts && (args.iterations.is_some() || args.c.is_some()) {
        return Err(conflict("--iterations/--c"));
    }
    if algo == Algo::Oracle && (args.prune.is_some() || args.history || args.seed.is_some() || args.trace) {
        return Err(conflict("--prune/--history/--seed/--trace"));
    }
    if algo == Algo::Mcts && args.prune == Some(PruningLevel::AlphaBeta) {
        return Err(Failure::usage("MCTS supports --prune none, bounds or all"));
    }
    match (args.mode, &args.goal) {
        (ModeArg::Goal, None) => Err(Failure::usage("--mode goal needs --goal ROW,COL")),
        (ModeArg::Scout, Some(_)) => Err(Failure::usage("--goal needs --mode goal")),
        _ => Ok(()),
    }
}

fn solve(args: SolveArgs, forced: Option<Algo>) -> Result<(), Failure> {
    let algo = match (forced, args.algo) {
        (Some(f), Some(a)) if f != a => return Err(Failure::usage("the oracle command takes no other --algo")),
        (Some(f), _) => f,
        (None, a) => a.unwrap_or(Algo::Minimax),
    };
    check_flags(&args, algo)?;
    let map = read_map(&args.map)?;
    let p = penalty(&args.penalty)?;
    let goal = args.goal.as_deref().map(|g| parse_goal(&map, g)).transpose()?;
    let model = match goal {
        Some(c) => RewardModel::goal(p, map.cell_at(c).expect("checked")),
        None => RewardModel::scout(p),
    };
    let scenario = Scenario::with_map(map.clone(), model, args.horizon).map_err(|e| Failure::usage(e.to_string()))?;
    let root = scenario.initial_state();

    let mut config = ResolvedConfig {
        map: map.to_text(),
        horizon: args.horizon,
        penalty: p,
        mode: if goal.is_some() { Mode::Goal } else { Mode::Scout },
        goal: goal.map(|c| [c.row, c.col]),
        algo: String::new(),
        prune: None,
        history: args.history,
        iterations: None,
        c: None,
        seed: args.seed.unwrap_or(0),
    };
    let start = Instant::now();
    let (outcome, trace) = match algo {
        Algo::Minimax => {
            let level = args.prune.unwrap_or(PruningLevel::Bounds);
            let order = args.seed.map_or(ChildOrder::Canonical, ChildOrder::Seeded);
            let search = SearchConfig::new(level).with_order(order).with_history(args.history);
            let r = minimax_search(&scenario, &root, &search).map_err(Failure::internal)?;
            config.algo = "minimax".into();
            config.prune = Some(level.as_str().into());
            let trace = args
                .trace
                .then(|| report::trace(&scenario, &root, &r.principal_variation, TraceSource::PrincipalVariation))
                .transpose()
                .map_err(Failure::internal)?;
            (Outcome::minimax(&map, &r), trace)
        }
        Algo::Mcts => {
            let level = args.prune.unwrap_or(PruningLevel::Bounds);
            let mc = MctsConfig {
                iterations: args.iterations.unwrap_or(MctsConfig::default().iterations),
                c: args.c.unwrap_or(1.0),
                seed: args.seed.unwrap_or(0),
                bounds: level.bounds(),
                history: args.history || level == PruningLevel::All,
                ..Default::default()
            };
            let r = mcts_search(&scenario, &root, &mc).map_err(|e| Failure::usage(e.to_string()))?;
            config.algo = "mcts".into();
            config.prune = Some(level.as_str().into());
            config.iterations = Some(mc.iterations);
            config.c = Some(mc.c);
            let trace = args
                .trace
                .then(|| report::trace(&scenario, &root, &r.greedy_line, TraceSource::GreedyMeanDescent))
                .transpose()
                .map_err(Failure::internal)?;
            (Outcome::mcts(&map, &r), trace)
        }
        Algo::Oracle => {
            let r = brute_force_value(&scenario, &root).map_err(|e: OracleError| Failure { code: EXIT_INFEASIBLE, message: e.to_string() })?;
            config.algo = "oracle".into();
            (Outcome::oracle(&map, &r), None)
        }
    };
    let elapsed = start.elapsed();
    let mut record = RunRecord::new("solve", config, outcome);
    record.trace = trace;
    if args.timing {
        record.elapsed_ms = Some(elapsed.as_secs_f64() * 1e3);
    }
    match args.format {
        Format::Json => print!("{}", record.to_json()),
        Format::Text => print!("{}", text_record(&record)),
    }
    Ok(())
}

fn text_record(record: &RunRecord) -> String {
    let mut out = format!("algorithm: {}\nhorizon: {}\npenalty: {}\n", record.config.algo, record.config.horizon, format_value(&record.config.penalty));
    match &record.result {
        Outcome::Minimax { root_value, principal_variation, complete, stats } => {
            out += &format!("root value: {}\nprincipal variation: {principal_variation:?}\ncomplete: {complete}\n", format_value(root_value));
            out += &format!(
                "nodes: {}  pruned ab/t1/t2/t3: {}/{}/{}/{}\n",
                stats.nodes_generated, stats.pruned_alpha_beta, stats.pruned_thm1, stats.pruned_thm2, stats.pruned_thm3
            );
        }
        Outcome::Mcts { best_action, root_value_estimate, iterations, greedy_line, stats, .. } => {
            out += &format!(
                "best action: {best_action:?}\nvalue estimate: {}\niterations: {iterations}\ngreedy line: {greedy_line:?}\nnodes: {}\n",
                format_value(root_value_estimate),
                stats.nodes_generated
            );
        }
        Outcome::Oracle { value, optimal_actions_at_root, total_nodes, .. } => {
            out += &format!("value: {}\noptimal root moves: {optimal_actions_at_root:?}\nnodes: {total_nodes}\n", format_value(value));
        }
    }
    if let Some(ms) = record.elapsed_ms {
        out += &format!("elapsed: {ms:.1} ms\n");
    }
    if let Some(t) = &record.trace {
        out.push('\n');
        out += &report::trace_text(t);
    }
    out
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    report::write_atomic(&path, bytes).map_err(|e| Failure::internal(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn pretty(value: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("json serializes");
    s.push('\n');
    s.into_bytes()
}

fn run_bench(args: BenchArgs) -> Result<(), Failure> {
    let fixed = args.map.as_deref().map(read_map).transpose()?;
    let penalties = args.penalties.iter().map(|p| penalty(p)).collect::<Result<Vec<_>, _>>()?;
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::internal(format!("{}: {e}", args.out.display())))?;
    let exec = Execution::Parallel;
    let usage = |e: bench::BenchError| match e {
        bench::BenchError::Oracle(_) => Failure { code: EXIT_INFEASIBLE, message: e.to_string() },
        bench::BenchError::Spec(_) => Failure::usage(e.to_string()),
        _ => Failure::internal(e),
    };
    match args.sweep {
        Sweep::NodeCount => {
            let horizons = args.horizons.clone().unwrap_or_else(|| vec![1, 2, 3]);
            let source = match &fixed {
                Some(m) => MapSource::Fixed(m.clone()),
                None => MapSource::Random { width: args.width, height: args.height, density: args.density },
            };
            let spec = SweepSpec {
                source,
                horizons: horizons.clone(),
                penalties: penalties.clone(),
                pruning: args.prune.clone(),
                trials: args.trials.unwrap_or(10),
                base_seed: args.seed,
                check_oracle: args.oracle,
            };
            let report = bench::run_node_count_sweep(&spec, exec).map_err(usage)?;
            let inputs = json!({
                "map": fixed.as_ref().map(|m| m.to_text()),
                "width": args.width,
                "height": args.height,
                "density": args.density,
                "horizons": horizons,
                "penalties": penalties.iter().map(format_value).collect::<Vec<_>>(),
                "pruning": args.prune.iter().map(|l| l.as_str()).collect::<Vec<_>>(),
                "trials": spec.trials,
                "seed": args.seed,
                "oracle": args.oracle,
            });
            write(&args.out, "records.csv", &bench::records_csv(&report.records, args.timing))?;
            write(&args.out, "summary.json", &pretty(&summary("node-count", &inputs, &report)))?;
            if report.history_checked > 0 {
                let audit = json!({
                    "checked": report.history_checked,
                    "counterexamples": report.history_counterexamples,
                });
                write(&args.out, "history_audit.json", &pretty(&audit))?;
            }
            if !report.sound() {
                let path = write(&args.out, "replay.json", &pretty(&json!(report.mismatches)))?;
                return Err(Failure {
                    code: EXIT_ALARM,
                    message: format!("root values differ across pruning levels; replay data in {}", path.display()),
                });
            }
        }
        Sweep::SuccessFraction => {
            let map = fixed.clone().ok_or_else(|| Failure::usage("success-fraction needs --map"))?;
            let horizons = args.horizons.clone().unwrap_or_else(|| vec![3]);
            let spec = SuccessSpec {
                map,
                horizons: horizons.clone(),
                penalty: penalties[0],
                budgets: args.budgets.clone(),
                trials: args.trials.unwrap_or(50),
                base_seed: args.seed,
                c: args.c,
                history: args.history,
            };
            let report = bench::run_success_fraction(&spec, exec).map_err(usage)?;
            let inputs = json!({
                "map": spec.map.to_text(),
                "horizons": horizons,
                "penalty": format_value(&spec.penalty),
                "budgets": spec.budgets,
                "trials": spec.trials,
                "seed": args.seed,
                "c": args.c,
                "history": args.history,
            });
            write(&args.out, "records.csv", &bench::records_csv(&report.records, args.timing))?;
            write(&args.out, "summary.json", &pretty(&summary("success-fraction", &inputs, &report)))?;
        }
        Sweep::PenaltyDemo => {
            let map = fixed.clone().unwrap_or_else(bench::demo_map);
            let horizons = args.horizons.clone().unwrap_or_else(|| vec![3]);
            let [horizon] = horizons[..] else {
                return Err(Failure::usage("penalty-demo takes a single horizon"));
            };
            let (lo, hi) = (penalty(&args.p_low)?, penalty(&args.p_high)?);
            let demo = bench::run_penalty_demo(&map, horizon, lo, hi).map_err(usage)?;
            let inputs = json!({
                "map": map.to_text(),
                "horizon": horizon,
                "p_low": format_value(&lo),
                "p_high": format_value(&hi),
            });
            let records = [demo.low.record.clone(), demo.high.record.clone()];
            write(&args.out, "records.csv", &bench::records_csv(&records, args.timing))?;
            write(&args.out, "summary.json", &pretty(&summary("penalty-demo", &inputs, &demo)))?;
            let text = format!(
                "P = {}\n{}\nP = {}\n{}",
                format_value(&lo),
                report::trace_text(&demo.low.trace),
                format_value(&hi),
                report::trace_text(&demo.high.trace)
            );
            write(&args.out, "trace.txt", text.as_bytes())?;
            if !demo.tradeoff_holds() {
                eprintln!("warning: this map shows no detection/scanning tradeoff at these penalties");
            }
        }
    }
    Ok(())
}

fn summary(sweep: &str, inputs: &serde_json::Value, result: &impl serde::Serialize) -> serde_json::Value {
    json!({
        "schema_version": report::SCHEMA_VERSION,
        "sweep": sweep,
        "inputs_digest": report::digest(&[inputs.to_string()]),
        "inputs": inputs,
        "result": result,
    })
}
