//! Acceptance checks, one test per criterion.
//!
//! Each test prints a single `PASS`/`FAIL` line straight to stderr (so it
//! shows up even under output capture) and then asserts. Tolerances are the
//! constants below.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use scout_duel::bench::{self, run_node_count_sweep, run_penalty_demo, run_success_fraction, MapSource, SuccessSpec, SweepSpec};
use scout_duel::gridworld::GridMap;
use scout_duel::minimax::{minimax_search, ChildOrder, PruningLevel, SearchConfig};
use scout_duel::par::Execution;
use scout_duel::value::int;

use common::{envelope_violations, report_line, scout};

/// Maps per density in the equivalence sweep (three densities).
const C1_MAPS_PER_DENSITY: u32 = 70;
const C1_DENSITIES: [f64; 3] = [0.0, 0.15, 0.3];
/// Brute force must generate at least this many times the nodes of full pruning.
const C2_MIN_REDUCTION: f64 = 10.0;
const C2_ORDERS: u32 = 30;
const C3_TRIALS: u32 = 50;
const C3_REQUIRED: u32 = 40;
const C3_BUDGETS: [u64; 6] = [1, 10, 100, 1000, 10_000, 30_000];
/// Exploration constants tried, smallest first, until the unpruned baseline converges.
const C3_C_GRID: [f64; 8] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];
const C3_CALIBRATION_TRIALS: u32 = 10;
const C5_HORIZON: u32 = 3;
const NOTE_BUDGETS: [u64; 6] = [100, 300, 1000, 3000, 10_000, 30_000];

/// Fixed 10x10 instance for the pruning and MCTS criteria.
const ROOMS_10: &str = "\
10 10
A....#....
.....#....
..##.#.##.
..........
####..####
..........
.##.#..##.
....#.....
....#....G
..........
";

fn rooms() -> GridMap {
    GridMap::parse(ROOMS_10).unwrap()
}

fn verdict(id: &str, title: &str, ok: bool, detail: String) -> bool {
    report_line(&format!("[acceptance] {id} {} {title}: {detail}", if ok { "PASS" } else { "FAIL" }));
    ok
}

fn artifact_dir() -> &'static Path {
    Path::new(env!("CARGO_TARGET_TMPDIR"))
}

#[test]
fn c1_c6_oracle_equivalence_and_history_audit() {
    let mut instances = 0;
    let mut mismatches = Vec::new();
    let mut history_checked = 0;
    let mut counterexamples = Vec::new();
    for (k, density) in C1_DENSITIES.into_iter().enumerate() {
        let spec = SweepSpec {
            source: MapSource::Random { width: 6, height: 6, density },
            horizons: vec![1, 2, 3],
            penalties: vec![int(1), int(3), int(30)],
            pruning: vec![PruningLevel::None, PruningLevel::AlphaBeta, PruningLevel::Bounds, PruningLevel::All],
            trials: C1_MAPS_PER_DENSITY,
            base_seed: 1000 + k as u64,
            check_oracle: true,
        };
        let r = run_node_count_sweep(&spec, Execution::Parallel).unwrap();
        instances += r.instances;
        mismatches.extend(r.mismatches);
        history_checked += r.history_checked;
        counterexamples.extend(r.history_counterexamples);
    }
    let maps = C1_MAPS_PER_DENSITY as usize * C1_DENSITIES.len();
    let c1 = verdict(
        "C1",
        "oracle equivalence",
        mismatches.is_empty() && maps >= 200,
        format!("{maps} maps, {instances} instances, {} mismatches across none/ab/bounds/oracle", mismatches.len()),
    );

    let path = artifact_dir().join("history_audit.json");
    let audit = serde_json::json!({
        "checked": history_checked,
        "preserved": history_checked - counterexamples.len(),
        "counterexamples": counterexamples,
    });
    let written = bench_write(&path, &serde_json::to_vec_pretty(&audit).unwrap());
    let c6 = verdict(
        "C6",
        "history rule audit",
        written && history_checked == instances,
        format!("{history_checked} instances, {} counterexamples logged to {}", counterexamples.len(), path.display()),
    );
    assert!(c1 && c6);
}

fn bench_write(path: &Path, bytes: &[u8]) -> bool {
    scout_duel::report::write_atomic(path, bytes).is_ok() && path.exists()
}

#[test]
fn c2_pruning_effectiveness() {
    let s = scout(rooms(), int(3), 5);
    let root = s.initial_state();
    let brute = minimax_search(&s, &root, &SearchConfig::new(PruningLevel::None)).unwrap();
    let spec = SweepSpec {
        source: MapSource::Fixed(rooms()),
        horizons: vec![5],
        penalties: vec![int(3)],
        pruning: vec![PruningLevel::AlphaBeta, PruningLevel::Bounds],
        trials: C2_ORDERS,
        base_seed: 2,
        check_oracle: false,
    };
    let r = run_node_count_sweep(&spec, Execution::Parallel).unwrap();
    let nodes = |level: &str| -> Vec<u64> {
        r.records.iter().filter(|x| x.pruning == level).map(|x| x.stats.nodes_generated).collect()
    };
    let (ab, bounds) = (nodes("ab"), nodes("bounds"));
    let (_, ab_median, _) = bench::min_median_max(&ab).unwrap();
    let (bmin, b_median, bmax) = bench::min_median_max(&bounds).unwrap();
    let values_agree = r.sound() && r.records.iter().all(|x| x.root_value == brute.root_value);
    let reduction = brute.stats.nodes_generated as f64 / b_median;
    let per_trial = ab.iter().zip(&bounds).all(|(a, b)| b <= a);
    let ok = values_agree && reduction >= C2_MIN_REDUCTION && b_median <= ab_median;
    let c2 = verdict(
        "C2",
        "pruning effectiveness",
        ok,
        format!(
            "T=5 brute {} nodes; bounds min/median/max {bmin}/{b_median}/{bmax} ({reduction:.1}x); ab median {ab_median}; \
             bounds <= ab on every order: {per_trial}",
            brute.stats.nodes_generated
        ),
    );
    assert!(c2);
}

fn c3_spec(horizon: u32, budgets: &[u64], c: f64, trials: u32, base_seed: u64) -> SuccessSpec {
    SuccessSpec {
        map: rooms(),
        horizons: vec![horizon],
        penalty: int(3),
        budgets: budgets.to_vec(),
        trials,
        base_seed,
        c,
        history: false,
    }
}

/// Smallest `c` on the grid at which unpruned MCTS reaches 80% within the budgets.
///
/// `c` multiplies a bonus in objective units, so its useful size depends on
/// the map's total weight; it is calibrated on separate seeds like the budget.
fn calibrate_c(horizon: u32, budgets: &[u64]) -> Option<f64> {
    C3_C_GRID.into_iter().find(|&c| {
        let r = run_success_fraction(&c3_spec(horizon, budgets, c, C3_CALIBRATION_TRIALS, 97), Execution::Parallel).unwrap();
        r.curves[0].threshold_unpruned.is_some()
    })
}

#[test]
fn c3_c4_mcts_convergence_and_pruning_trend() {
    let Some(c) = calibrate_c(3, &C3_BUDGETS) else {
        verdict("C3", "MCTS convergence", false, format!("no c in {C3_C_GRID:?} converges within {C3_BUDGETS:?}"));
        verdict("C4", "pruned MCTS trend", false, "not evaluated".into());
        panic!("MCTS calibration failed");
    };
    let report = run_success_fraction(&c3_spec(3, &C3_BUDGETS, c, C3_TRIALS, 3), Execution::Parallel).unwrap();
    let curve = &report.curves[0];
    let first = C3_BUDGETS[0];
    let last = *C3_BUDGETS.last().unwrap();
    let line = |pruned: bool| {
        C3_BUDGETS.iter().map(|&b| curve.point(b, pruned).unwrap().successes.to_string()).collect::<Vec<_>>().join(" ")
    };
    let reached = curve.points.iter().any(|p| p.successes >= C3_REQUIRED);
    let rises = |pruned: bool| curve.point(last, pruned).unwrap().fraction > curve.point(first, pruned).unwrap().fraction;
    let c3 = verdict(
        "C3",
        "MCTS convergence",
        reached && rises(false) && rises(true),
        format!(
            "T=3 c={c} successes/{C3_TRIALS} over budgets {C3_BUDGETS:?}: unpruned [{}], pruned [{}]; 80% budget unpruned {:?}, pruned {:?}",
            line(false),
            line(true),
            curve.threshold_unpruned,
            curve.threshold_pruned
        ),
    );
    let c4 = verdict(
        "C4",
        "pruned MCTS trend",
        curve.total_pruned >= curve.total_unpruned,
        format!("total successes pruned {} vs unpruned {}", curve.total_pruned, curve.total_unpruned),
    );
    assert!(c3 && c4);
}

#[test]
fn c5_penalty_tradeoff() {
    let demo = run_penalty_demo(&bench::demo_map(), C5_HORIZON, int(3), int(30)).unwrap();
    let ok = demo.strictly_fewer_detections && demo.scans_at_least;
    let c5 = verdict(
        "C5",
        "penalty tradeoff",
        ok,
        format!(
            "T={C5_HORIZON}: P=3 detections {} scanned {}; P=30 detections {} scanned {}",
            demo.low.detections, demo.low.scanned_weight, demo.high.detections, demo.high.scanned_weight
        ),
    );
    assert!(c5);
}

#[test]
fn c7_envelope_property() {
    let (mut nodes, mut bad, mut instances) = (0, 0, 0);
    for seed in 0..40 {
        for density in [0.0, 0.2, 0.4] {
            let map = bench::random_map(seed, 4, 4, density).unwrap();
            for p in [int(1), int(3), int(30)] {
                let (n, b) = envelope_violations(&scout(map.clone(), p, 2));
                nodes += n;
                bad += b;
                instances += 1;
            }
        }
    }
    let c7 = verdict("C7", "envelope property", bad == 0, format!("4x4 T=2: {instances} instances, {nodes} nodes, {bad} violations"));
    assert!(c7);
}

fn cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_scout-duel")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn c8_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("rooms.txt");
    std::fs::write(&map, ROOMS_10).unwrap();
    let m = map.to_str().unwrap();
    let solves: [&[&str]; 3] = [
        &["solve", "--map", m, "--horizon", "3", "--penalty", "3", "--algo", "mcts", "--seed", "7", "--iterations", "2000", "--trace"],
        &["solve", "--map", m, "--horizon", "3", "--penalty", "3", "--algo", "minimax", "--prune", "all", "--seed", "11", "--trace"],
        &["oracle", "--map", m, "--horizon", "2", "--penalty", "3"],
    ];
    let mut identical = 0;
    for args in solves {
        identical += (cli(args) == cli(args)) as usize;
    }
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = out.to_str().unwrap();
        cli(&["bench", "--sweep", "node-count", "--horizons", "1,2,3", "--trials", "8", "--oracle", "--seed", "4", "--out", o]);
        cli(&["bench", "--sweep", "success-fraction", "--map", m, "--horizons", "2", "--budgets", "10,100", "--trials", "20", "--out", &format!("{o}/sf")]);
        cli(&["bench", "--sweep", "penalty-demo", "--out", &format!("{o}/pd")]);
        let files = ["records.csv", "summary.json", "sf/records.csv", "sf/summary.json", "pd/records.csv", "pd/summary.json", "pd/trace.txt"];
        outputs.push(files.map(|f| std::fs::read(out.join(f)).unwrap()));
    }
    let files_same = outputs[0] == outputs[1];
    let c8 = verdict(
        "C8",
        "determinism",
        identical == solves.len() && files_same,
        format!("{identical}/{} solve commands byte-identical; bench files identical: {files_same}", solves.len()),
    );
    assert!(c8);
}

/// Relative wall-clock ordering at T = 5; reported, not a numbered criterion.
#[test]
fn note_mcts_is_faster_than_exact_search_at_t5() {
    let s = scout(rooms(), int(3), 5);
    let start = Instant::now();
    let exact = minimax_search(&s, &s.initial_state(), &SearchConfig::new(PruningLevel::Bounds).with_order(ChildOrder::Canonical)).unwrap();
    let exact_ms = start.elapsed().as_secs_f64() * 1e3;
    let c = calibrate_c(5, &NOTE_BUDGETS).unwrap_or(1.0);
    let report = run_success_fraction(&c3_spec(5, &NOTE_BUDGETS, c, C3_TRIALS, 5), Execution::Parallel).unwrap();
    let curve = &report.curves[0];
    assert_eq!(curve.root_value, exact.root_value);
    let budget = curve.threshold_pruned;
    let mcts_ms = budget.map(|b| {
        let runs: Vec<f64> = report
            .records
            .iter()
            .filter(|r| r.iterations == Some(b) && r.pruning != "none")
            .map(|r| r.elapsed.as_secs_f64() * 1e3)
            .collect();
        runs.iter().sum::<f64>() / runs.len() as f64
    });
    let ok = mcts_ms.is_some_and(|ms| ms < exact_ms);
    let detail = match (budget, mcts_ms) {
        (Some(b), Some(ms)) => format!("c={c}: MCTS reaches 80% at {b} iterations in {ms:.1} ms per run; exact search {exact_ms:.1} ms"),
        _ => format!("MCTS never reached 80% within {NOTE_BUDGETS:?}; exact search {exact_ms:.1} ms"),
    };
    let note = verdict("NOTE", "T=5 wall-clock ordering", ok, detail);
    assert!(note);
}
