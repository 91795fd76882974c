//! Exact depth-first minimax with fail-soft alpha-beta and structural pruning.
//!
//! The tree alternates agent plies (maximizing) and guard plies (minimizing);
//! leaves sit at ply `2T`, right after the guard's last move. No evaluation
//! happens above the leaves, so the root value is the exact finite-horizon
//! optimum whenever the history rule is off.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::game::{Actions, GameState, Scenario, Side};
use crate::gridworld::CellIndex;
use crate::pruning::{self, HistoryTable, NodeSummary};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PruningLevel {
    /// Full enumeration.
    None,
    /// Alpha-beta cutoffs only.
    #[serde(rename = "ab")]
    AlphaBeta,
    /// Alpha-beta plus the agent/guard sibling envelope rules.
    Bounds,
    /// `Bounds` plus the history rule.
    All,
}

impl PruningLevel {
    pub fn alpha_beta(self) -> bool {
        self != PruningLevel::None
    }

    pub fn bounds(self) -> bool {
        matches!(self, PruningLevel::Bounds | PruningLevel::All)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PruningLevel::None => "none",
            PruningLevel::AlphaBeta => "ab",
            PruningLevel::Bounds => "bounds",
            PruningLevel::All => "all",
        }
    }
}

impl std::str::FromStr for PruningLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(PruningLevel::None),
            "ab" => Ok(PruningLevel::AlphaBeta),
            "bounds" => Ok(PruningLevel::Bounds),
            "all" => Ok(PruningLevel::All),
            other => Err(format!("unknown pruning level {other:?} (none|ab|bounds|all)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChildOrder {
    /// stay, up, down, left, right
    Canonical,
    /// Per-node shuffle derived from the seed and the node's path.
    Seeded(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub pruning: PruningLevel,
    pub order: ChildOrder,
    /// Enables the history rule on top of `pruning`. Implied by `PruningLevel::All`.
    pub history: bool,
    /// Abort once this many nodes have been generated.
    pub node_limit: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { pruning: PruningLevel::Bounds, order: ChildOrder::Canonical, history: false, node_limit: None }
    }
}

impl SearchConfig {
    pub fn new(pruning: PruningLevel) -> Self {
        SearchConfig { pruning, ..Default::default() }
    }

    pub fn with_order(mut self, order: ChildOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_history(mut self, on: bool) -> Self {
        self.history = on;
        self
    }

    pub fn history_enabled(&self) -> bool {
        self.history || self.pruning == PruningLevel::All
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_generated: u64,
    pub pruned_alpha_beta: u64,
    pub pruned_thm1: u64,
    pub pruned_thm2: u64,
    pub pruned_thm3: u64,
    pub max_depth_reached: u32,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub root_value: Value,
    /// Alternating agent/guard destinations, starting with the agent.
    pub principal_variation: Vec<CellIndex>,
    pub stats: SearchStats,
    /// False when the node limit stopped the search early.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("search must start at t = 0 with the agent to move")]
    BadRoot,
}

/// Solves the game rooted at `root` to the scenario's horizon.
pub fn minimax_search(scenario: &Scenario, root: &GameState, config: &SearchConfig) -> Result<SearchResult, SearchError> {
    if root.step != 0 || root.to_move != Side::Agent {
        return Err(SearchError::BadRoot);
    }
    let start = Instant::now();
    let horizon = scenario.horizon();
    let penalty = *scenario.penalty();
    let t = Value::from_integer(horizon as i128);
    let inf = scenario.total_weight() + t + penalty * t + Value::from_integer(1);
    let mut searcher = Searcher {
        scenario,
        config,
        penalty,
        horizon,
        stats: SearchStats { nodes_generated: 1, ..Default::default() },
        pv: vec![Vec::new(); 2 * horizon as usize + 2],
        history: config.history_enabled().then(HistoryTable::new),
        aborted: false,
    };
    let root_value = searcher.search(root, 0, -inf, inf, ROOT_KEY);
    let mut stats = searcher.stats;
    stats.elapsed = start.elapsed();
    Ok(SearchResult {
        root_value,
        principal_variation: std::mem::take(&mut searcher.pv[0]),
        stats,
        complete: !searcher.aborted,
    })
}

const ROOT_KEY: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Orders `actions` for a node. Returns (action, canonical index) pairs.
pub(crate) fn order_children(actions: &Actions, order: ChildOrder, node_key: u64) -> smallvec::SmallVec<[(CellIndex, usize); 5]> {
    let mut out: smallvec::SmallVec<[(CellIndex, usize); 5]> =
        actions.iter().copied().enumerate().map(|(i, a)| (a, i)).collect();
    if let ChildOrder::Seeded(seed) = order {
        let mut state = mix64(seed ^ node_key);
        for i in (1..out.len()).rev() {
            state = mix64(state);
            let j = (state % (i as u64 + 1)) as usize;
            out.swap(i, j);
        }
    }
    out
}

#[inline]
fn child_key(parent: u64, canonical_index: usize) -> u64 {
    mix64(parent ^ (canonical_index as u64 + 1).wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

struct Searcher<'a> {
    scenario: &'a Scenario,
    config: &'a SearchConfig,
    penalty: Value,
    horizon: u32,
    stats: SearchStats,
    pv: Vec<Vec<CellIndex>>,
    history: Option<HistoryTable>,
    aborted: bool,
}

impl Searcher<'_> {
    fn over_limit(&mut self) -> bool {
        if let Some(limit) = self.config.node_limit {
            if self.stats.nodes_generated > limit {
                self.aborted = true;
            }
        }
        self.aborted
    }

    fn set_pv(&mut self, ply: usize, action: CellIndex) {
        let (head, tail) = self.pv.split_at_mut(ply + 1);
        let line = &mut head[ply];
        line.clear();
        line.push(action);
        line.extend_from_slice(&tail[0]);
    }

    /// Fail-soft alpha-beta. Returns the exact value when it lies strictly
    /// inside `(alpha, beta)`, otherwise a bound on the correct side.
    fn search(&mut self, state: &GameState, ply: usize, mut alpha: Value, mut beta: Value, key: u64) -> Value {
        self.pv[ply].clear();
        self.stats.max_depth_reached = self.stats.max_depth_reached.max(ply as u32);
        if self.scenario.is_terminal(state) {
            return self.scenario.objective_value(state);
        }
        let level = self.config.pruning;
        let actions = self.scenario.legal_actions(state);
        let children = order_children(&actions, self.config.order, key);
        let maximizing = state.to_move == Side::Agent;
        let mut best: Option<Value> = None;
        // Tightest sibling envelope seen so far: max worst case (agent) or min best case (guard).
        let mut envelope: Option<Value> = None;

        for (i, &(action, canonical)) in children.iter().enumerate() {
            let child = self.scenario.step_unchecked(state, action);
            self.stats.nodes_generated += 1;
            if self.over_limit() {
                return best.unwrap_or(alpha);
            }

            let summary = (level.bounds() || self.history.is_some()).then(|| NodeSummary::of(self.scenario, &child));
            if let (true, Some(s)) = (level.bounds(), &summary) {
                if let Some(env) = &envelope {
                    if maximizing && *env >= s.best_case(&self.penalty) {
                        self.stats.pruned_thm1 += 1;
                        continue;
                    }
                    if !maximizing && *env <= s.worst_case(self.horizon, &self.penalty) {
                        self.stats.pruned_thm2 += 1;
                        continue;
                    }
                }
            }
            if maximizing {
                if let (Some(table), Some(s)) = (self.history.as_mut(), &summary) {
                    if pruning::thm3_prunes(table, s, &self.penalty).expect("agent-level summary") {
                        self.stats.pruned_thm3 += 1;
                        continue;
                    }
                }
            }

            let v = self.search(&child, ply + 1, alpha, beta, child_key(key, canonical));
            if self.aborted {
                return best.map_or(v, |b| if maximizing { b.max(v) } else { b.min(v) });
            }

            if let (true, Some(s)) = (level.bounds(), &summary) {
                envelope = Some(match (maximizing, envelope) {
                    (true, None) => s.worst_case(self.horizon, &self.penalty),
                    (true, Some(e)) => e.max(s.worst_case(self.horizon, &self.penalty)),
                    (false, None) => s.best_case(&self.penalty),
                    (false, Some(e)) => e.min(s.best_case(&self.penalty)),
                });
            }

            let improves = match &best {
                None => true,
                Some(b) => (maximizing && v > *b) || (!maximizing && v < *b),
            };
            if improves {
                best = Some(v);
                self.set_pv(ply, action);
            }

            if level.alpha_beta() {
                if maximizing {
                    alpha = alpha.max(v);
                } else {
                    beta = beta.min(v);
                }
                if beta <= alpha {
                    self.stats.pruned_alpha_beta += (children.len() - i - 1) as u64;
                    break;
                }
            }
        }

        match best {
            Some(b) => b,
            // Every child fell to the history rule; fall back to the pessimistic envelope.
            None => {
                let net = self.scenario.objective_value(state);
                if maximizing {
                    pruning::worst_case(net, self.scenario.remaining_steps(state), &self.penalty)
                } else {
                    pruning::best_case(net, self.scenario.remaining_reward_bound(state))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::RewardModel;
    use crate::gridworld::GridMap;
    use crate::value::int;

    fn scenario(text: &str, penalty: i64, horizon: u32) -> Scenario {
        Scenario::with_map(GridMap::parse(text).unwrap(), RewardModel::scout(int(penalty)), horizon).unwrap()
    }

    #[test]
    fn zero_horizon() {
        let s = scenario("3 1\nA.G\n", 3, 0);
        let r = minimax_search(&s, &s.initial_state(), &SearchConfig::default()).unwrap();
        assert_eq!(r.root_value, int(0));
        assert!(r.principal_variation.is_empty());
        assert_eq!(r.stats.nodes_generated, 1);
    }

    #[test]
    fn forced_detection() {
        let s = scenario("2 1\nAG\n", 3, 1);
        for level in [PruningLevel::None, PruningLevel::AlphaBeta, PruningLevel::Bounds, PruningLevel::All] {
            let r = minimax_search(&s, &s.initial_state(), &SearchConfig::new(level)).unwrap();
            assert_eq!(r.root_value, int(-3), "{level:?}");
            assert_eq!(r.principal_variation.len(), 2);
        }
    }

    #[test]
    fn rejects_non_root_state() {
        let s = scenario("3 1\nA.G\n", 3, 1);
        let st = s.apply(&s.initial_state(), s.map().agent_start()).unwrap();
        assert_eq!(minimax_search(&s, &st, &SearchConfig::default()), Err(SearchError::BadRoot));
    }

    #[test]
    fn no_pruning_counts_the_full_tree() {
        // Open 5x5 with the agent and guard in the interior: T = 1 gives 1 + 5 + 25.
        let s = scenario("5 5\n.....\n.A...\n.....\n...G.\n.....\n", 3, 1);
        let r = minimax_search(&s, &s.initial_state(), &SearchConfig::new(PruningLevel::None)).unwrap();
        assert_eq!(r.stats.nodes_generated, 31);
        assert_eq!(r.stats.max_depth_reached, 2);
    }

    #[test]
    fn alpha_beta_cutoff_at_min_node() {
        // Guard adjacent to agent in a corridor: its first reply (stay) already
        // detects, so later guard replies below a better agent alternative get cut.
        let s = scenario("4 1\nA.G.\n", 5, 1);
        let r = minimax_search(&s, &s.initial_state(), &SearchConfig::new(PruningLevel::AlphaBeta)).unwrap();
        assert!(r.stats.pruned_alpha_beta > 0);
        let full = minimax_search(&s, &s.initial_state(), &SearchConfig::new(PruningLevel::None)).unwrap();
        assert_eq!(r.root_value, full.root_value);
        assert!(r.stats.nodes_generated < full.stats.nodes_generated);
    }

    #[test]
    fn node_limit_marks_incomplete() {
        let s = scenario("5 5\n.....\n.A...\n.....\n...G.\n.....\n", 3, 3);
        let cfg = SearchConfig { node_limit: Some(50), ..SearchConfig::new(PruningLevel::None) };
        let r = minimax_search(&s, &s.initial_state(), &cfg).unwrap();
        assert!(!r.complete);
        assert!(r.stats.nodes_generated <= 51);
    }

    #[test]
    fn seeded_order_is_a_permutation_and_stable() {
        let actions: Actions = (0..5).map(CellIndex::new).collect();
        let a = order_children(&actions, ChildOrder::Seeded(7), 42);
        let b = order_children(&actions, ChildOrder::Seeded(7), 42);
        assert_eq!(a, b);
        let mut idx: Vec<usize> = a.iter().map(|p| p.1).collect();
        idx.sort();
        assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        let canon = order_children(&actions, ChildOrder::Canonical, 42);
        assert!(canon.iter().enumerate().all(|(i, p)| p.1 == i));
    }

    #[test]
    fn pv_replays_to_root_value() {
        let s = scenario("5 4\nA.#..\n..#..\n.....\n...#G\n", 3, 3);
        for level in [PruningLevel::None, PruningLevel::AlphaBeta, PruningLevel::Bounds] {
            let r = minimax_search(&s, &s.initial_state(), &SearchConfig::new(level)).unwrap();
            assert_eq!(r.principal_variation.len(), 6);
            let states = s.replay(&s.initial_state(), &r.principal_variation).unwrap();
            assert_eq!(s.objective_value(states.last().unwrap()), r.root_value);
        }
    }
}
