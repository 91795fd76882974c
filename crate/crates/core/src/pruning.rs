//! Structural pruning rules shared by the minimax and MCTS solvers.
//!
//! Every completion of a node `X` at time step `t` ends with a value in the
//! envelope `[net(X) − (T−t)·P, net(X) + F(X)]`, where `net = R − η·P` and `F`
//! bounds the reward still obtainable. The sibling rules compare these
//! envelopes:
//!
//! * agent siblings (nodes reached by an agent move): `B` is dropped when the
//!   worst case of `A` is at least the best case of `B`;
//! * guard siblings (nodes reached by a guard move): `B` is dropped when the
//!   best case of `A` is at most the worst case of `B`.
//!
//! The history rule drops an agent-level node when an earlier node with the
//! same agent and guard cells had scanned a superset and a net value higher
//! by more than `Δt·P`. It is not proven sound and is off by default.

use std::collections::HashMap;

use crate::game::{GameState, Scenario, Side};
use crate::gridworld::{CellIndex, CellSet};
use crate::value::Value;

/// Tree level of a node: which player's move produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    /// Reached by an agent move; the guard moves next.
    Max,
    /// Reached by a guard move (or the root); the agent moves next.
    Min,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PruneError {
    #[error("nodes are on different levels: {a:?}@{a_step} vs {b:?}@{b_step}")]
    LevelMismatch { a: Level, a_step: u32, b: Level, b_step: u32 },
    #[error("rule expects {expected:?}-level nodes")]
    WrongLevel { expected: Level },
}

/// Pruning-relevant view of a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSummary<'a> {
    pub step: u32,
    pub level: Level,
    pub agent: CellIndex,
    pub guard: CellIndex,
    pub reward: Value,
    pub detections: u32,
    pub scanned: &'a CellSet,
    /// Upper bound on remaining positive reward.
    pub bound: Value,
}

impl<'a> NodeSummary<'a> {
    /// Summarizes `state`. The reward bound is zero once the agent has no
    /// moves left, otherwise [`Scenario::remaining_reward_bound`].
    pub fn of(scenario: &Scenario, state: &'a GameState) -> Self {
        let bound = if scenario.remaining_agent_moves(state) == 0 {
            Value::from_integer(0)
        } else {
            scenario.remaining_reward_bound(state)
        };
        NodeSummary {
            step: state.step,
            level: match state.to_move {
                Side::Guard => Level::Max,
                Side::Agent => Level::Min,
            },
            agent: state.agent,
            guard: state.guard,
            reward: state.reward,
            detections: state.detections,
            scanned: &state.scanned,
            bound,
        }
    }

    /// `R − η·P`.
    pub fn net(&self, penalty: &Value) -> Value {
        self.reward - penalty * Value::from_integer(self.detections as i128)
    }

    /// Lowest final value any completion can reach: detected at every remaining step.
    pub fn worst_case(&self, horizon: u32, penalty: &Value) -> Value {
        worst_case(self.net(penalty), horizon.saturating_sub(self.step), penalty)
    }

    /// Highest final value any completion can reach: all remaining reward, no detections.
    pub fn best_case(&self, penalty: &Value) -> Value {
        self.net(penalty) + self.bound
    }
}

#[inline]
pub fn worst_case(net: Value, remaining_steps: u32, penalty: &Value) -> Value {
    net - penalty * Value::from_integer(remaining_steps as i128)
}

#[inline]
pub fn best_case(net: Value, bound: Value) -> Value {
    net + bound
}

fn same_level(a: &NodeSummary, b: &NodeSummary, expected: Level) -> Result<(), PruneError> {
    if a.level != b.level || a.step != b.step {
        return Err(PruneError::LevelMismatch { a: a.level, a_step: a.step, b: b.level, b_step: b.step });
    }
    if a.level != expected {
        return Err(PruneError::WrongLevel { expected });
    }
    Ok(())
}

/// Agent-sibling rule: true iff `B` can be dropped because `A`'s worst case
/// is at least `B`'s best case.
pub fn thm1_prunes(a: &NodeSummary, b: &NodeSummary, horizon: u32, penalty: &Value) -> Result<bool, PruneError> {
    same_level(a, b, Level::Max)?;
    Ok(a.worst_case(horizon, penalty) >= b.best_case(penalty))
}

/// Guard-sibling rule: true iff `B` can be dropped because `A`'s best case
/// is at most `B`'s worst case.
pub fn thm2_prunes(a: &NodeSummary, b: &NodeSummary, horizon: u32, penalty: &Value) -> Result<bool, PruneError> {
    same_level(a, b, Level::Min)?;
    Ok(a.best_case(penalty) <= b.worst_case(horizon, penalty))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryEntry {
    pub step: u32,
    pub net: Value,
    pub scanned: CellSet,
}

impl HistoryEntry {
    /// Weak dominance: earlier-or-equal, superset scan, and net ahead by at least `Δt·P`.
    fn dominates(&self, other: &HistoryEntry, penalty: &Value) -> bool {
        self.step <= other.step
            && self.scanned.is_superset(&other.scanned).unwrap_or(false)
            && self.net >= other.net + penalty * Value::from_integer((other.step - self.step) as i128)
    }
}

/// Agent-level nodes seen so far, keyed by (agent, guard) cell.
#[derive(Debug, Clone, Default)]
pub struct HistoryTable {
    entries: HashMap<(CellIndex, CellIndex), Vec<HistoryEntry>>,
}

impl HistoryTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self, agent: CellIndex, guard: CellIndex) -> &[HistoryEntry] {
        self.entries.get(&(agent, guard)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// True iff no stored entry weakly dominates another under the same key.
    pub fn is_antichain(&self, penalty: &Value) -> bool {
        self.entries.values().all(|list| {
            list.iter()
                .enumerate()
                .all(|(i, a)| list.iter().enumerate().all(|(j, b)| i == j || !a.dominates(b, penalty)))
        })
    }
}

/// History rule. Returns true when some stored entry `(t₁, v₁, S₁)` under the
/// candidate's key has `t₁ < t₂`, `S₁ ⊇ S₂` and `v₁ > v₂ + (t₂−t₁)·P`.
/// On a miss the candidate is recorded and entries it dominates are evicted.
pub fn thm3_prunes(table: &mut HistoryTable, candidate: &NodeSummary, penalty: &Value) -> Result<bool, PruneError> {
    if candidate.level != Level::Max {
        return Err(PruneError::WrongLevel { expected: Level::Max });
    }
    let net = candidate.net(penalty);
    let list = table.entries.entry((candidate.agent, candidate.guard)).or_default();
    let pruned = list.iter().any(|e| {
        e.step < candidate.step
            && e.scanned.is_superset(candidate.scanned).unwrap_or(false)
            && e.net > net + penalty * Value::from_integer((candidate.step - e.step) as i128)
    });
    if pruned {
        return Ok(true);
    }
    let entry = HistoryEntry { step: candidate.step, net, scanned: candidate.scanned.clone() };
    if !list.iter().any(|e| e.dominates(&entry, penalty)) {
        list.retain(|e| !entry.dominates(e, penalty));
        list.push(entry);
    }
    Ok(false)
}
