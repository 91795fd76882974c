//! Monte-Carlo tree search with UCT selection and structural pruning.
//!
//! Each iteration descends from the root through fully expanded nodes,
//! expands one untried move, plays a uniform-random rollout to the horizon
//! and adds the terminal value to every node on the path. Agent nodes pick
//! the child maximizing `mean + c·√(2 ln N_parent / N_child)`; guard nodes
//! pick the child minimizing `mean − c·√(2 ln N_parent / N_child)`. A newly
//! expanded child that a sibling rule (or the history rule) prunes is marked
//! and the iteration ends without a rollout.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::{GameState, Scenario, Side};
use crate::gridworld::CellIndex;
use crate::minimax::SearchStats;
use crate::pruning::{self, HistoryTable, NodeSummary};
use crate::value::{self, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BestChild {
    /// Highest mean value.
    #[default]
    MaxMean,
    /// Most visits ("robust child").
    MaxVisits,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MctsConfig {
    pub iterations: u64,
    /// Exploration weight.
    pub c: f64,
    pub seed: u64,
    /// Agent/guard sibling envelope rules.
    pub bounds: bool,
    /// History rule.
    pub history: bool,
    pub best_child: BestChild,
}

impl Default for MctsConfig {
    fn default() -> Self {
        MctsConfig { iterations: 1000, c: 1.0, seed: 0, bounds: true, history: false, best_child: BestChild::MaxMean }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MctsError {
    #[error("at least one iteration is required")]
    NoIterations,
    #[error("root state is terminal; there is no move to choose")]
    TerminalRoot,
    #[error("search must start at t = 0")]
    BadRoot,
}

#[derive(Debug, Clone)]
pub struct MctsNode {
    pub state: GameState,
    /// Move that produced this node.
    pub action: Option<CellIndex>,
    pub parent: Option<usize>,
    /// Sum of backpropagated terminal values.
    pub q: Value,
    pub n: u64,
    pub children: Vec<usize>,
    /// Moves not yet expanded, stored in reverse canonical order.
    untried: Vec<CellIndex>,
    pub pruned: bool,
    pub depth: u32,
}

impl MctsNode {
    pub fn untried(&self) -> impl Iterator<Item = CellIndex> + '_ {
        self.untried.iter().rev().copied()
    }

    pub fn is_fully_expanded(&self) -> bool {
        self.untried.is_empty()
    }

    /// Exact mean `Q/N`; `None` before the first visit.
    pub fn mean(&self) -> Option<Value> {
        (self.n > 0).then(|| self.q / Value::from_integer(self.n as i128))
    }

    fn mean_f64(&self) -> f64 {
        value::to_f64(&self.q) / self.n as f64
    }
}

/// UCB score of a child as seen by the side choosing at its parent.
///
/// Agent: `mean + c·√(2 ln N_parent / N_child)`; guard: `mean − c·√(…)`.
pub fn ucb_score(mean: f64, parent_visits: u64, child_visits: u64, c: f64, chooser: Side) -> f64 {
    let bonus = c * (2.0 * (parent_visits as f64).ln() / child_visits as f64).sqrt();
    match chooser {
        Side::Agent => mean + bonus,
        Side::Guard => mean - bonus,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expansion {
    Added(usize),
    Pruned(usize),
}

#[derive(Debug, Clone)]
pub struct MctsTree<'a> {
    scenario: &'a Scenario,
    config: MctsConfig,
    nodes: Vec<MctsNode>,
    history: Option<HistoryTable>,
    stats: SearchStats,
    /// Selections that stopped at a node whose children were all pruned.
    exhausted_selections: u64,
}

impl<'a> MctsTree<'a> {
    pub fn new(scenario: &'a Scenario, root: GameState, config: MctsConfig) -> Self {
        let untried = Self::untried_for(scenario, &root);
        let history = config.history.then(HistoryTable::new);
        let root = MctsNode {
            state: root,
            action: None,
            parent: None,
            q: Value::zero(),
            n: 0,
            children: Vec::new(),
            untried,
            pruned: false,
            depth: 0,
        };
        MctsTree {
            scenario,
            config,
            nodes: vec![root],
            history,
            stats: SearchStats { nodes_generated: 1, ..Default::default() },
            exhausted_selections: 0,
        }
    }

    fn untried_for(scenario: &Scenario, state: &GameState) -> Vec<CellIndex> {
        if scenario.is_terminal(state) {
            return Vec::new();
        }
        let mut moves: Vec<CellIndex> = scenario.legal_actions(state).into_vec();
        moves.reverse();
        moves
    }

    pub fn root(&self) -> &MctsNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &MctsNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn exhausted_selections(&self) -> u64 {
        self.exhausted_selections
    }

    fn is_terminal(&self, id: usize) -> bool {
        self.scenario.is_terminal(&self.nodes[id].state)
    }

    /// Path from the root to the node where this iteration stops descending.
    pub fn select(&self) -> Vec<usize> {
        let mut path = vec![0];
        let mut cur = 0;
        loop {
            let node = &self.nodes[cur];
            if self.is_terminal(cur) || !node.is_fully_expanded() {
                return path;
            }
            let chooser = node.state.to_move;
            let mut best: Option<(usize, f64)> = None;
            for &child in &node.children {
                let ch = &self.nodes[child];
                if ch.pruned {
                    continue;
                }
                if ch.n == 0 {
                    best = Some((child, f64::INFINITY));
                    break;
                }
                let score = ucb_score(ch.mean_f64(), node.n, ch.n, self.config.c, chooser);
                let better = match best {
                    None => true,
                    Some((_, b)) => match chooser {
                        Side::Agent => score > b,
                        Side::Guard => score < b,
                    },
                };
                if better {
                    best = Some((child, score));
                }
            }
            match best {
                Some((child, _)) => {
                    path.push(child);
                    cur = child;
                }
                None => return path,
            }
        }
    }

    /// Expands the next untried move of `id`, applying the pruning rules.
    ///
    /// Panics if `id` has no untried moves.
    pub fn expand(&mut self, id: usize) -> Expansion {
        let action = self.nodes[id].untried.pop().expect("expand called on a fully expanded node");
        let parent_state = &self.nodes[id].state;
        let child_state = self.scenario.step_unchecked(parent_state, action);
        let maximizing = parent_state.to_move == Side::Agent;
        let horizon = self.scenario.horizon();
        let penalty = *self.scenario.penalty();

        let mut pruned = false;
        if self.config.bounds {
            let candidate = NodeSummary::of(self.scenario, &child_state);
            let siblings = self.nodes[id].children.iter().map(|&c| &self.nodes[c]).filter(|c| !c.pruned);
            if maximizing {
                let best_worst = siblings
                    .map(|c| NodeSummary::of(self.scenario, &c.state).worst_case(horizon, &penalty))
                    .max();
                if best_worst.is_some_and(|w| w >= candidate.best_case(&penalty)) {
                    self.stats.pruned_thm1 += 1;
                    pruned = true;
                }
            } else {
                let best_best = siblings.map(|c| NodeSummary::of(self.scenario, &c.state).best_case(&penalty)).min();
                if best_best.is_some_and(|b| b <= candidate.worst_case(horizon, &penalty)) {
                    self.stats.pruned_thm2 += 1;
                    pruned = true;
                }
            }
        }
        if !pruned && maximizing {
            if let Some(table) = self.history.as_mut() {
                let candidate = NodeSummary::of(self.scenario, &child_state);
                if pruning::thm3_prunes(table, &candidate, &penalty).expect("agent-level summary") {
                    self.stats.pruned_thm3 += 1;
                    pruned = true;
                }
            }
        }

        let untried = if pruned { Vec::new() } else { Self::untried_for(self.scenario, &child_state) };
        let depth = self.nodes[id].depth + 1;
        let child = self.nodes.len();
        self.nodes.push(MctsNode {
            state: child_state,
            action: Some(action),
            parent: Some(id),
            q: Value::zero(),
            n: 0,
            children: Vec::new(),
            untried,
            pruned,
            depth,
        });
        self.nodes[id].children.push(child);
        self.stats.nodes_generated += 1;
        self.stats.max_depth_reached = self.stats.max_depth_reached.max(depth);
        if pruned {
            Expansion::Pruned(child)
        } else {
            Expansion::Added(child)
        }
    }

    /// Adds `value` to `Q` and one to `N` of every node on `path`.
    pub fn backpropagate(&mut self, path: &[usize], value: Value) {
        for &id in path {
            let node = &mut self.nodes[id];
            node.q += value;
            node.n += 1;
        }
    }

    /// One select → expand → rollout → backpropagate cycle.
    pub fn iterate<R: Rng>(&mut self, rng: &mut R) {
        let mut path = self.select();
        let leaf = *path.last().expect("path starts at root");
        let value = if self.is_terminal(leaf) {
            self.scenario.objective_value(&self.nodes[leaf].state)
        } else if !self.nodes[leaf].is_fully_expanded() {
            match self.expand(leaf) {
                Expansion::Pruned(_) => return,
                Expansion::Added(child) => {
                    path.push(child);
                    rollout(self.scenario, &self.nodes[child].state, rng)
                }
            }
        } else {
            // All children pruned: reuse the node's own estimate.
            self.exhausted_selections += 1;
            match self.nodes[leaf].mean() {
                Some(m) => m,
                None => rollout(self.scenario, &self.nodes[leaf].state, rng),
            }
        };
        self.backpropagate(&path, value);
    }

    /// Root child chosen under the configured rule; ties keep canonical order.
    pub fn best_root_child(&self) -> Option<usize> {
        self.best_child_of(0, Side::Agent, self.config.best_child)
    }

    fn best_child_of(&self, id: usize, chooser: Side, rule: BestChild) -> Option<usize> {
        let mut best: Option<usize> = None;
        for &c in &self.nodes[id].children {
            let ch = &self.nodes[c];
            if ch.pruned || ch.n == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    let bn = &self.nodes[b];
                    match rule {
                        BestChild::MaxVisits => ch.n > bn.n,
                        BestChild::MaxMean => {
                            let (m, bm) = (ch.mean().expect("visited"), bn.mean().expect("visited"));
                            match chooser {
                                Side::Agent => m > bm,
                                Side::Guard => m < bm,
                            }
                        }
                    }
                }
            };
            if better {
                best = Some(c);
            }
        }
        best
    }

    /// Moves along the greedy-by-mean descent from the root.
    pub fn greedy_line(&self) -> Vec<CellIndex> {
        let mut line = Vec::new();
        let mut cur = 0;
        while let Some(next) = self.best_child_of(cur, self.nodes[cur].state.to_move, BestChild::MaxMean) {
            line.push(self.nodes[next].action.expect("child has an action"));
            cur = next;
        }
        line
    }
}

/// Plays uniformly random moves for both sides to the horizon; returns `R − η·P`.
pub fn rollout<R: Rng>(scenario: &Scenario, state: &GameState, rng: &mut R) -> Value {
    let mut state = state.clone();
    while !scenario.is_terminal(&state) {
        let actions = scenario.legal_actions(&state);
        let pick = actions[rng.random_range(0..actions.len())];
        state = scenario.step_unchecked(&state, pick);
    }
    scenario.objective_value(&state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MctsResult {
    pub best_action: CellIndex,
    /// Mean value of the chosen root child.
    pub root_value_estimate: Value,
    /// Mean value over all root visits.
    pub root_mean: Value,
    pub stats: SearchStats,
    pub iterations: u64,
    /// Iterations that reached backpropagation.
    pub completed_iterations: u64,
    pub greedy_line: Vec<CellIndex>,
}

/// Runs `config.iterations` iterations from `root` and picks a root move.
pub fn mcts_search(scenario: &Scenario, root: &GameState, config: &MctsConfig) -> Result<MctsResult, MctsError> {
    if config.iterations == 0 {
        return Err(MctsError::NoIterations);
    }
    if root.step != 0 || root.to_move != Side::Agent {
        return Err(MctsError::BadRoot);
    }
    if scenario.is_terminal(root) {
        return Err(MctsError::TerminalRoot);
    }
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut tree = MctsTree::new(scenario, root.clone(), config.clone());
    for _ in 0..config.iterations {
        tree.iterate(&mut rng);
    }
    let best = tree.best_root_child().expect("first expansion of the root is never pruned");
    let best_node = tree.node(best);
    let mut stats = tree.stats().clone();
    stats.elapsed = start.elapsed();
    Ok(MctsResult {
        best_action: best_node.action.expect("child has an action"),
        root_value_estimate: best_node.mean().expect("visited"),
        root_mean: tree.root().mean().unwrap_or_default(),
        stats,
        iterations: config.iterations,
        completed_iterations: tree.root().n,
        greedy_line: tree.greedy_line(),
    })
}
