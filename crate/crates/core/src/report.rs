//! Run records, ASCII trace frames and atomic file output.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::game::{GameError, GameState, Scenario, Side};
use crate::gridworld::{CellIndex, GridMap};
use crate::mcts::MctsResult;
use crate::minimax::{SearchResult, SearchStats};
use crate::oracle::OracleResult;
use crate::value::Value;

/// Bumped whenever a field of [`RunRecord`] changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// A cell as `[row, col]`.
pub type Pos = [usize; 2];

pub fn pos(map: &GridMap, cell: CellIndex) -> Pos {
    let c = map.coord(cell);
    [c.row, c.col]
}

pub fn positions(map: &GridMap, cells: &[CellIndex]) -> Vec<Pos> {
    cells.iter().map(|&c| pos(map, c)).collect()
}

/// Lowercase sha256 hex of the concatenated parts, each terminated by a newline.
pub fn digest<S: AsRef<str>>(parts: &[S]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_ref().as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Every input needed to rerun a `solve` invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub map: String,
    pub horizon: u32,
    #[serde(with = "crate::value::serde_value")]
    pub penalty: Value,
    pub mode: crate::game::Mode,
    pub goal: Option<Pos>,
    pub algo: String,
    pub prune: Option<String>,
    pub history: bool,
    pub iterations: Option<u64>,
    pub c: Option<f64>,
    pub seed: u64,
}

impl ResolvedConfig {
    pub fn digest(&self) -> String {
        digest(&[serde_json::to_string(self).expect("config serializes")])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Outcome {
    Minimax {
        #[serde(with = "crate::value::serde_value")]
        root_value: Value,
        principal_variation: Vec<Pos>,
        complete: bool,
        stats: SearchStats,
    },
    Mcts {
        best_action: Pos,
        #[serde(with = "crate::value::serde_value")]
        root_value_estimate: Value,
        #[serde(with = "crate::value::serde_value")]
        root_mean: Value,
        iterations: u64,
        completed_iterations: u64,
        greedy_line: Vec<Pos>,
        stats: SearchStats,
    },
    Oracle {
        #[serde(with = "crate::value::serde_value")]
        value: Value,
        optimal_actions_at_root: Vec<Pos>,
        total_nodes: u64,
        terminal_nodes: u64,
    },
}

impl Outcome {
    pub fn minimax(map: &GridMap, r: &SearchResult) -> Self {
        Outcome::Minimax {
            root_value: r.root_value,
            principal_variation: positions(map, &r.principal_variation),
            complete: r.complete,
            stats: r.stats.clone(),
        }
    }

    pub fn mcts(map: &GridMap, r: &MctsResult) -> Self {
        Outcome::Mcts {
            best_action: pos(map, r.best_action),
            root_value_estimate: r.root_value_estimate,
            root_mean: r.root_mean,
            iterations: r.iterations,
            completed_iterations: r.completed_iterations,
            greedy_line: positions(map, &r.greedy_line),
            stats: r.stats.clone(),
        }
    }

    pub fn oracle(map: &GridMap, r: &OracleResult) -> Self {
        Outcome::Oracle {
            value: r.value,
            optimal_actions_at_root: positions(map, &r.optimal_actions_at_root),
            total_nodes: r.total_nodes,
            terminal_nodes: r.terminal_nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub command: String,
    pub inputs_digest: String,
    pub config: ResolvedConfig,
    pub result: Outcome,
    /// Only present when timing was requested, so default output is reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
}

impl RunRecord {
    pub fn new(command: &str, config: ResolvedConfig, result: Outcome) -> Self {
        RunRecord {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            inputs_digest: config.digest(),
            config,
            result,
            elapsed_ms: None,
            trace: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }
}

/// Where a trace's moves came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    PrincipalVariation,
    GreedyMeanDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub source: TraceSource,
    pub frames: Vec<Frame>,
}

/// One board snapshot after a move.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    pub ply: usize,
    pub step: u32,
    /// Side that just moved; `None` for the opening frame.
    pub mover: Option<Side>,
    pub agent: Pos,
    pub guard: Pos,
    #[serde(with = "crate::value::serde_value")]
    pub reward: Value,
    pub detections: u32,
    pub rows: Vec<String>,
}

/// Draws `state`; cells scanned since `prev` are marked `*`.
///
/// Legend: `A` agent, `G` guard, `X` both on one cell, `#` obstacle,
/// `*` newly scanned, `+` seen by the guard, `.` anything else.
pub fn render(scenario: &Scenario, prev: Option<&GameState>, state: &GameState) -> Vec<String> {
    let map = scenario.map();
    let guard_view = scenario.visibility().vis(state.guard);
    (0..map.height())
        .map(|r| {
            (0..map.width())
                .map(|c| {
                    let cell = map.cell(r, c);
                    if map.is_obstacle(cell) {
                        '#'
                    } else if cell == state.agent && cell == state.guard {
                        'X'
                    } else if cell == state.agent {
                        'A'
                    } else if cell == state.guard {
                        'G'
                    } else if prev.is_some_and(|p| !p.scanned.contains(cell)) && state.scanned.contains(cell) {
                        '*'
                    } else if guard_view.contains(cell) {
                        '+'
                    } else {
                        '.'
                    }
                })
                .collect()
        })
        .collect()
}

/// Replays `moves` from `root` and draws a frame after every ply.
pub fn trace(scenario: &Scenario, root: &GameState, moves: &[CellIndex], source: TraceSource) -> Result<Trace, GameError> {
    let states = scenario.replay(root, moves)?;
    let map = scenario.map();
    let frames = states
        .iter()
        .enumerate()
        .map(|(ply, s)| {
            let prev = ply.checked_sub(1).map(|i| &states[i]);
            Frame {
                ply,
                step: s.step,
                mover: prev.map(|p| p.to_move),
                agent: pos(map, s.agent),
                guard: pos(map, s.guard),
                reward: s.reward,
                detections: s.detections,
                rows: render(scenario, prev, s),
            }
        })
        .collect();
    Ok(Trace { source, frames })
}

/// Plain-text rendering of a trace.
pub fn trace_text(trace: &Trace) -> String {
    let mut out = String::new();
    let label = match trace.source {
        TraceSource::PrincipalVariation => "principal variation",
        TraceSource::GreedyMeanDescent => "greedy descent by mean",
    };
    out.push_str(&format!("trace ({label})\n"));
    for f in &trace.frames {
        let who = match f.mover {
            None => "start".to_string(),
            Some(Side::Agent) => format!("agent -> {:?}", f.agent),
            Some(Side::Guard) => format!("guard -> {:?}", f.guard),
        };
        out.push_str(&format!(
            "\nply {} step {} {}  R={} detections={}\n",
            f.ply,
            f.step,
            who,
            crate::value::format_value(&f.reward),
            f.detections
        ));
        for row in &f.rows {
            out.push_str(row);
            out.push('\n');
        }
    }
    out
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
///
/// Readers never observe a half-written file, and a failed write leaves nothing behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}
