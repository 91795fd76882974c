use std::time::Instant;

use serde::Serialize;

use super::{derive_seed, min_median_max, random_map, stream, Algorithm, BenchError, TrialRecord};
use crate::game::{RewardModel, Scenario};
use crate::gridworld::{CellIndex, GridMap};
use crate::mcts::{mcts_search, MctsConfig};
use crate::minimax::{minimax_search, ChildOrder, PruningLevel, SearchConfig, SearchStats};
use crate::oracle::{brute_force_value_with, root_action_values};
use crate::par::{self, Execution};
use crate::report::{self, pos, positions, Pos, Trace, TraceSource};
use crate::value::{format_value, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum MapSource {
    Fixed(GridMap),
    /// A fresh map per trial index, shared across horizons and penalties.
    Random { width: usize, height: usize, density: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub source: MapSource,
    pub horizons: Vec<u32>,
    pub penalties: Vec<Value>,
    /// `All` adds history pruning; its disagreements are logged, not fatal.
    pub pruning: Vec<PruningLevel>,
    pub trials: u32,
    pub base_seed: u64,
    /// Also solve each instance with the brute-force oracle.
    pub check_oracle: bool,
}

impl SweepSpec {
    fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::Spec("trials must be at least 1".into()));
        }
        if self.horizons.is_empty() || self.penalties.is_empty() || self.pruning.is_empty() {
            return Err(BenchError::Spec("horizons, penalties and pruning levels must be non-empty".into()));
        }
        if self.penalties.iter().any(|p| *p <= Value::from_integer(0)) {
            return Err(BenchError::Spec("penalties must be positive".into()));
        }
        Ok(())
    }

    fn map_for(&self, trial: u32) -> Result<GridMap, BenchError> {
        match &self.source {
            MapSource::Fixed(m) => Ok(m.clone()),
            MapSource::Random { width, height, density } => {
                random_map(derive_seed(self.base_seed, stream::MAP, trial as u64), *width, *height, *density)
            }
        }
    }
}

/// Values that disagreed on one instance, with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub instance_id: String,
    pub map: String,
    pub horizon: u32,
    #[serde(with = "crate::value::serde_value")]
    pub penalty: Value,
    pub order_seed: u64,
    /// `(solver label, value)` pairs, reference first.
    pub values: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub horizon: u32,
    #[serde(with = "crate::value::serde_value")]
    pub penalty: Value,
    pub algorithm: Algorithm,
    pub pruning: String,
    pub trials: usize,
    pub min: u64,
    pub median: f64,
    pub max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeCountReport {
    pub instances: usize,
    pub summary: Vec<SummaryRow>,
    /// Sound pruning disagreed with the reference: a soundness alarm.
    pub mismatches: Vec<Mismatch>,
    /// Instances solved with history pruning.
    pub history_checked: usize,
    pub history_counterexamples: Vec<Mismatch>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl NodeCountReport {
    pub fn sound(&self) -> bool {
        self.mismatches.is_empty()
    }
}

struct Instance {
    trial: u32,
    horizon: u32,
    penalty: Value,
}

struct InstanceOutcome {
    records: Vec<TrialRecord>,
    mismatch: Option<Mismatch>,
    history: Option<Option<Mismatch>>,
}

fn instance_id(horizon: u32, penalty: &Value, trial: u32) -> String {
    format!("T{horizon}-P{}-t{trial:03}", format_value(penalty))
}

fn trial_digest(map: &GridMap, algorithm: Algorithm, pruning: &str, horizon: u32, penalty: &Value, seed: u64, extra: &str) -> String {
    report::digest(&[
        map.to_text(),
        algorithm.as_str().to_string(),
        pruning.to_string(),
        horizon.to_string(),
        format_value(penalty),
        seed.to_string(),
        extra.to_string(),
    ])
}

fn solve_instance(spec: &SweepSpec, inst: &Instance) -> Result<InstanceOutcome, BenchError> {
    let map = spec.map_for(inst.trial)?;
    let scenario = Scenario::with_map(map, RewardModel::scout(inst.penalty), inst.horizon)
        .map_err(|e| BenchError::Spec(e.to_string()))?;
    let root = scenario.initial_state();
    let id = instance_id(inst.horizon, &inst.penalty, inst.trial);
    let order_seed = derive_seed(spec.base_seed, stream::ORDER, inst.trial as u64);
    let mut records = Vec::new();
    let mut sound: Vec<(String, Value)> = Vec::new();
    let mut history = None;

    if spec.check_oracle {
        let start = Instant::now();
        let r = brute_force_value_with(&scenario, &root, Execution::Sequential)?;
        records.push(TrialRecord {
            instance_id: id.clone(),
            algorithm: Algorithm::Oracle,
            pruning: "none".into(),
            horizon: inst.horizon,
            penalty: inst.penalty,
            seed: order_seed,
            config_digest: trial_digest(scenario.map(), Algorithm::Oracle, "none", inst.horizon, &inst.penalty, 0, ""),
            root_value: r.value,
            best_action: r.optimal_actions_at_root.first().map(|&a| pos(scenario.map(), a)),
            stats: SearchStats { nodes_generated: r.total_nodes, ..Default::default() },
            iterations: None,
            optimal_found: None,
            elapsed: start.elapsed(),
        });
        sound.push(("oracle".into(), r.value));
    }

    for &level in &spec.pruning {
        let config = SearchConfig::new(level).with_order(ChildOrder::Seeded(order_seed));
        let r = minimax_search(&scenario, &root, &config).map_err(|e| BenchError::Solver(e.to_string()))?;
        let label = level.as_str();
        records.push(TrialRecord {
            instance_id: id.clone(),
            algorithm: Algorithm::Minimax,
            pruning: label.into(),
            horizon: inst.horizon,
            penalty: inst.penalty,
            seed: order_seed,
            config_digest: trial_digest(scenario.map(), Algorithm::Minimax, label, inst.horizon, &inst.penalty, order_seed, ""),
            root_value: r.root_value,
            best_action: r.principal_variation.first().map(|&a| pos(scenario.map(), a)),
            stats: r.stats.clone(),
            iterations: None,
            optimal_found: None,
            elapsed: r.stats.elapsed,
        });
        if level == PruningLevel::All {
            history = Some(r.root_value);
        } else {
            sound.push((label.into(), r.root_value));
        }
    }

    let mismatch_with = |extra: Option<(String, Value)>| {
        let mut values: Vec<(String, String)> = sound.iter().map(|(l, v)| (l.clone(), format_value(v))).collect();
        if let Some((l, v)) = extra {
            values.push((l, format_value(&v)));
        }
        Mismatch {
            instance_id: id.clone(),
            map: scenario.map().to_text(),
            horizon: inst.horizon,
            penalty: inst.penalty,
            order_seed,
            values,
        }
    };
    let reference = sound.first().map(|(_, v)| *v);
    let mismatch = sound.iter().any(|(_, v)| Some(*v) != reference).then(|| mismatch_with(None));
    let history = history.map(|h| match reference {
        Some(r) if r != h => Some(mismatch_with(Some(("all".into(), h)))),
        _ => None,
    });
    Ok(InstanceOutcome { records, mismatch, history })
}

/// Solves every (horizon, penalty, trial) instance at each pruning level.
///
/// Within one trial all levels share the same map and child order, so
/// their root values must agree exactly.
pub fn run_node_count_sweep(spec: &SweepSpec, exec: Execution) -> Result<NodeCountReport, BenchError> {
    spec.validate()?;
    let mut instances = Vec::new();
    for &horizon in &spec.horizons {
        for penalty in &spec.penalties {
            for trial in 0..spec.trials {
                instances.push(Instance { trial, horizon, penalty: *penalty });
            }
        }
    }
    let outcomes = par::map_slice(exec, &instances, |inst| solve_instance(spec, inst));
    let mut report = NodeCountReport {
        instances: instances.len(),
        summary: Vec::new(),
        mismatches: Vec::new(),
        history_checked: 0,
        history_counterexamples: Vec::new(),
        records: Vec::new(),
    };
    for o in outcomes {
        let o = o?;
        report.records.extend(o.records);
        report.mismatches.extend(o.mismatch);
        if let Some(h) = o.history {
            report.history_checked += 1;
            report.history_counterexamples.extend(h);
        }
    }
    report.summary = summarize(&report.records);
    Ok(report)
}

fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(u32, Value, Algorithm, String)> = Vec::new();
    for r in records {
        let k = (r.horizon, r.penalty, r.algorithm, r.pruning.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(horizon, penalty, algorithm, pruning)| {
            let nodes: Vec<u64> = records
                .iter()
                .filter(|r| r.horizon == horizon && r.penalty == penalty && r.algorithm == algorithm && r.pruning == pruning)
                .map(|r| r.stats.nodes_generated)
                .collect();
            let (min, median, max) = min_median_max(&nodes).expect("key came from a record");
            SummaryRow { horizon, penalty, algorithm, pruning, trials: nodes.len(), min, median, max }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessSpec {
    pub map: GridMap,
    pub horizons: Vec<u32>,
    pub penalty: Value,
    pub budgets: Vec<u64>,
    pub trials: u32,
    pub base_seed: u64,
    pub c: f64,
    /// Pruned runs also use history pruning.
    pub history: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub budget: u64,
    pub pruned: bool,
    pub successes: u32,
    pub trials: u32,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonCurve {
    pub horizon: u32,
    #[serde(with = "crate::value::serde_value")]
    pub root_value: Value,
    pub optimal_actions: Vec<Pos>,
    pub points: Vec<CurvePoint>,
    /// Smallest budget reaching an 80% success fraction.
    pub threshold_unpruned: Option<u64>,
    pub threshold_pruned: Option<u64>,
    pub total_unpruned: u32,
    pub total_pruned: u32,
}

impl HorizonCurve {
    pub fn point(&self, budget: u64, pruned: bool) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.budget == budget && p.pruned == pruned)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessReport {
    pub curves: Vec<HorizonCurve>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Fraction at or above which a budget counts as solving the instance.
pub const SUCCESS_THRESHOLD: f64 = 0.8;

/// MCTS success fraction against the exact optimal root moves, per budget.
///
/// Pruned and unpruned runs of the same trial index share a seed.
pub fn run_success_fraction(spec: &SuccessSpec, exec: Execution) -> Result<SuccessReport, BenchError> {
    if spec.trials == 0 || spec.budgets.is_empty() || spec.horizons.is_empty() {
        return Err(BenchError::Spec("need at least one trial, budget and horizon".into()));
    }
    if spec.budgets.contains(&0) {
        return Err(BenchError::Spec("budgets must be positive".into()));
    }
    let mut curves = Vec::new();
    let mut records = Vec::new();
    for &horizon in &spec.horizons {
        let scenario = Scenario::with_map(spec.map.clone(), RewardModel::scout(spec.penalty), horizon)
            .map_err(|e| BenchError::Spec(e.to_string()))?;
        let root = scenario.initial_state();
        if scenario.is_terminal(&root) {
            return Err(BenchError::Spec("horizon must be at least 1".into()));
        }
        let exact = minimax_search(&scenario, &root, &SearchConfig::new(PruningLevel::Bounds))
            .map_err(|e| BenchError::Solver(e.to_string()))?;
        let per_action = root_action_values(&scenario, &root)?;
        let optimal: Vec<CellIndex> = per_action.iter().filter(|(_, v)| *v == exact.root_value).map(|(a, _)| *a).collect();
        if optimal.is_empty() {
            return Err(BenchError::Solver("minimax value not attained by any root move".into()));
        }

        let mut jobs = Vec::new();
        for &budget in &spec.budgets {
            for pruned in [false, true] {
                for trial in 0..spec.trials {
                    jobs.push((budget, pruned, trial));
                }
            }
        }
        let runs = par::map_slice(exec, &jobs, |&(budget, pruned, trial)| {
            let seed = derive_seed(spec.base_seed, stream::MCTS, trial as u64);
            let config = MctsConfig {
                iterations: budget,
                c: spec.c,
                seed,
                bounds: pruned,
                history: pruned && spec.history,
                ..Default::default()
            };
            let r = mcts_search(&scenario, &root, &config).map_err(|e| BenchError::Solver(e.to_string()))?;
            let label = match (pruned, spec.history) {
                (false, _) => "none",
                (true, false) => "bounds",
                (true, true) => "all",
            };
            Ok(TrialRecord {
                instance_id: format!("T{horizon}-B{budget}-t{trial:03}"),
                algorithm: Algorithm::Mcts,
                pruning: label.into(),
                horizon,
                penalty: spec.penalty,
                seed,
                config_digest: trial_digest(scenario.map(), Algorithm::Mcts, label, horizon, &spec.penalty, seed, &format!("{budget} {}", spec.c)),
                root_value: r.root_value_estimate,
                best_action: Some(pos(scenario.map(), r.best_action)),
                stats: r.stats.clone(),
                iterations: Some(budget),
                optimal_found: Some(optimal.contains(&r.best_action)),
                elapsed: r.stats.elapsed,
            })
        });
        let runs: Vec<TrialRecord> = runs.into_iter().collect::<Result<_, BenchError>>()?;

        let mut points = Vec::new();
        for &budget in &spec.budgets {
            for pruned in [false, true] {
                let successes = jobs
                    .iter()
                    .zip(&runs)
                    .filter(|((b, p, _), r)| *b == budget && *p == pruned && r.optimal_found == Some(true))
                    .count() as u32;
                points.push(CurvePoint {
                    budget,
                    pruned,
                    successes,
                    trials: spec.trials,
                    fraction: successes as f64 / spec.trials as f64,
                });
            }
        }
        let threshold = |pruned: bool| {
            let mut hits: Vec<u64> = points.iter().filter(|p| p.pruned == pruned && p.fraction >= SUCCESS_THRESHOLD).map(|p| p.budget).collect();
            hits.sort_unstable();
            hits.first().copied()
        };
        let total = |pruned: bool| points.iter().filter(|p| p.pruned == pruned).map(|p| p.successes).sum();
        curves.push(HorizonCurve {
            horizon,
            root_value: exact.root_value,
            optimal_actions: positions(scenario.map(), &optimal),
            threshold_unpruned: threshold(false),
            threshold_pruned: threshold(true),
            total_unpruned: total(false),
            total_pruned: total(true),
            points,
        });
        records.extend(runs);
    }
    Ok(SuccessReport { curves, records })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoRun {
    #[serde(with = "crate::value::serde_value")]
    pub penalty: Value,
    #[serde(with = "crate::value::serde_value")]
    pub root_value: Value,
    pub principal_variation: Vec<Pos>,
    pub detections: u32,
    /// Reward collected along the principal variation.
    #[serde(with = "crate::value::serde_value")]
    pub scanned_weight: Value,
    pub trace: Trace,
    #[serde(skip)]
    pub record: TrialRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltyDemo {
    pub horizon: u32,
    pub low: DemoRun,
    pub high: DemoRun,
    /// High penalty is detected no more often than low penalty.
    pub fewer_detections: bool,
    pub strictly_fewer_detections: bool,
    /// Low penalty scans at least as much as high penalty.
    pub scans_at_least: bool,
}

impl PenaltyDemo {
    pub fn tradeoff_holds(&self) -> bool {
        self.fewer_detections && self.scans_at_least
    }
}

fn demo_run(map: &GridMap, horizon: u32, penalty: Value) -> Result<DemoRun, BenchError> {
    let scenario = Scenario::with_map(map.clone(), RewardModel::scout(penalty), horizon)
        .map_err(|e| BenchError::Spec(e.to_string()))?;
    let root = scenario.initial_state();
    let r = minimax_search(&scenario, &root, &SearchConfig::new(PruningLevel::Bounds))
        .map_err(|e| BenchError::Solver(e.to_string()))?;
    let states = scenario.replay(&root, &r.principal_variation).map_err(|e| BenchError::Solver(e.to_string()))?;
    let last = states.last().expect("replay includes the root");
    let trace = report::trace(&scenario, &root, &r.principal_variation, TraceSource::PrincipalVariation)
        .map_err(|e| BenchError::Solver(e.to_string()))?;
    let label = PruningLevel::Bounds.as_str();
    Ok(DemoRun {
        penalty,
        root_value: r.root_value,
        principal_variation: positions(map, &r.principal_variation),
        detections: last.detections,
        scanned_weight: last.reward,
        trace,
        record: TrialRecord {
            instance_id: format!("demo-P{}", format_value(&penalty)),
            algorithm: Algorithm::Minimax,
            pruning: label.into(),
            horizon,
            penalty,
            seed: 0,
            config_digest: trial_digest(map, Algorithm::Minimax, label, horizon, &penalty, 0, ""),
            root_value: r.root_value,
            best_action: r.principal_variation.first().map(|&a| pos(map, a)),
            stats: r.stats.clone(),
            iterations: None,
            optimal_found: None,
            elapsed: r.stats.elapsed,
        },
    })
}

/// Solves the same map under a low and a high penalty and compares the two lines of play.
pub fn run_penalty_demo(map: &GridMap, horizon: u32, p_low: Value, p_high: Value) -> Result<PenaltyDemo, BenchError> {
    if p_low > p_high {
        return Err(BenchError::Spec("low penalty exceeds high penalty".into()));
    }
    let low = demo_run(map, horizon, p_low)?;
    let high = demo_run(map, horizon, p_high)?;
    Ok(PenaltyDemo {
        horizon,
        fewer_detections: high.detections <= low.detections,
        strictly_fewer_detections: high.detections < low.detections,
        scans_at_least: low.scanned_weight >= high.scanned_weight,
        low,
        high,
    })
}
