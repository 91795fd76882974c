//! Experiment harness: node-count sweeps, MCTS success curves, penalty demos.
//!
//! Trials are independent and run through [`crate::par`]; results are
//! collected in input order so every file written is reproducible from the
//! spec and base seed alone. Per-trial seeds come from [`derive_seed`].

mod maps;
mod sweeps;

use std::time::Duration;

use serde::Serialize;

pub use maps::{demo_map, random_map, DEMO_MAP, MAX_ATTEMPTS};
pub use sweeps::{
    run_node_count_sweep, run_penalty_demo, run_success_fraction, CurvePoint, DemoRun, HorizonCurve, MapSource,
    Mismatch, NodeCountReport, PenaltyDemo, SuccessReport, SuccessSpec, SummaryRow, SweepSpec,
};

use crate::minimax::{mix64, SearchStats};
use crate::report::Pos;
use crate::value::{format_value, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error("no valid map for seed {seed} after {attempts} attempts")]
    Generation { seed: u64, attempts: u32 },
    #[error(transparent)]
    Oracle(#[from] crate::oracle::OracleError),
    #[error("solver failed: {0}")]
    Solver(String),
}

/// Seed streams keep map layouts, child orders and MCTS runs independent.
pub mod stream {
    pub const MAP: u64 = 0x6d61_7073;
    pub const ORDER: u64 = 0x6f72_6465;
    pub const MCTS: u64 = 0x6d63_7473;
}

/// Seed for trial `index` of `stream`: `mix64(mix64(base ^ stream) ^ index)`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    mix64(mix64(base ^ stream) ^ index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Minimax,
    Mcts,
    Oracle,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Minimax => "minimax",
            Algorithm::Mcts => "mcts",
            Algorithm::Oracle => "oracle",
        }
    }
}

/// One solver run inside a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub instance_id: String,
    pub algorithm: Algorithm,
    pub pruning: String,
    pub horizon: u32,
    #[serde(with = "crate::value::serde_value")]
    pub penalty: Value,
    pub seed: u64,
    pub config_digest: String,
    #[serde(with = "crate::value::serde_value")]
    pub root_value: Value,
    pub best_action: Option<Pos>,
    pub stats: SearchStats,
    pub iterations: Option<u64>,
    pub optimal_found: Option<bool>,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Column order of the raw CSV.
pub const CSV_HEADER: [&str; 15] = [
    "instance_id",
    "algorithm",
    "pruning",
    "horizon",
    "penalty",
    "seed",
    "root_value",
    "nodes_generated",
    "pruned_ab",
    "pruned_t1",
    "pruned_t2",
    "pruned_t3",
    "iterations",
    "elapsed_ms",
    "optimal_found",
];

fn csv_row(r: &TrialRecord, timing: bool) -> [String; 15] {
    let opt = |v: Option<String>| v.unwrap_or_default();
    [
        r.instance_id.clone(),
        r.algorithm.as_str().to_string(),
        r.pruning.clone(),
        r.horizon.to_string(),
        format_value(&r.penalty),
        r.seed.to_string(),
        format_value(&r.root_value),
        r.stats.nodes_generated.to_string(),
        r.stats.pruned_alpha_beta.to_string(),
        r.stats.pruned_thm1.to_string(),
        r.stats.pruned_thm2.to_string(),
        r.stats.pruned_thm3.to_string(),
        opt(r.iterations.map(|n| n.to_string())),
        opt(timing.then(|| format!("{:.3}", r.elapsed.as_secs_f64() * 1e3))),
        opt(r.optimal_found.map(|b| b.to_string())),
    ]
}

/// Raw per-trial CSV. `elapsed_ms` stays empty unless `timing` is set.
pub fn records_csv(records: &[TrialRecord], timing: bool) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.write_record(csv_row(r, timing)).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// `(min, median, max)`; the median of an even count averages the middle pair.
pub fn min_median_max(values: &[u64]) -> Option<(u64, f64, u64)> {
    let mut v = values.to_vec();
    v.sort_unstable();
    let n = v.len();
    let median = match n {
        0 => return None,
        _ if n % 2 == 1 => v[n / 2] as f64,
        _ => (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0,
    };
    Some((v[0], median, v[n - 1]))
}
