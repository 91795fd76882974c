//! Game state, legal moves and reward accounting.
//!
//! The objective for a play is `R − η·P`: `R` is the weight of cells newly
//! scanned along the agent's path (or accumulated goal gain), `η` the number
//! of time steps that ended with the agent inside the guard's visibility, and
//! `P` the per-detection penalty. The agent moves first in each time step and
//! detection is evaluated after the guard's reply.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::gridworld::{CellIndex, CellSet, Coord, GridMap, VisibilityOracle};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("penalty must be positive")]
    NonPositivePenalty,
    #[error("goal mode requires a goal cell")]
    MissingGoal,
    #[error("goal cell {0} is not a free cell")]
    BadGoal(Coord),
    #[error("it is the {expected:?}'s turn, not the {got:?}'s")]
    WrongSide { expected: Side, got: Side },
    #[error("illegal move to {0}")]
    IllegalMove(Coord),
    #[error("horizon already reached")]
    GameOver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Agent,
    Guard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Reward is the weight of newly scanned cells.
    Scout,
    /// Reward per step is `1 / (1 + manhattan(agent, goal))`.
    Goal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardModel {
    pub mode: Mode,
    pub penalty: Value,
    pub goal: Option<CellIndex>,
}

impl RewardModel {
    pub fn scout(penalty: Value) -> Self {
        RewardModel { mode: Mode::Scout, penalty, goal: None }
    }

    pub fn goal(penalty: Value, goal: CellIndex) -> Self {
        RewardModel { mode: Mode::Goal, penalty, goal: Some(goal) }
    }

    pub fn validate(&self, map: &GridMap) -> Result<(), GameError> {
        if self.penalty <= Value::zero() {
            return Err(GameError::NonPositivePenalty);
        }
        if self.mode == Mode::Goal {
            let goal = self.goal.ok_or(GameError::MissingGoal)?;
            if !map.is_free(goal) {
                let coord = if map.contains(goal) { map.coord(goal) } else { Coord::new(usize::MAX, usize::MAX) };
                return Err(GameError::BadGoal(coord));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameState {
    pub agent: CellIndex,
    pub guard: CellIndex,
    pub scanned: CellSet,
    /// Positive reward accumulated since t = 0.
    pub reward: Value,
    pub detections: u32,
    /// Completed time steps.
    pub step: u32,
    pub to_move: Side,
}

/// Up to five moves: stay, up, down, left, right.
pub type Actions = SmallVec<[CellIndex; 5]>;

/// A fully specified game instance: map, visibility, reward model and horizon.
#[derive(Debug, Clone)]
pub struct Scenario {
    map: GridMap,
    vis: VisibilityOracle,
    model: RewardModel,
    horizon: u32,
    start_weight: Value,
    total_weight: Value,
}

impl Scenario {
    pub fn new(map: GridMap, vis: VisibilityOracle, model: RewardModel, horizon: u32) -> Result<Self, GameError> {
        model.validate(&map)?;
        let start_weight = map.weight_of(vis.vis(map.agent_start()));
        let total_weight = map.total_weight();
        Ok(Scenario { map, vis, model, horizon, start_weight, total_weight })
    }

    /// Builds the visibility oracle with unlimited range.
    pub fn with_map(map: GridMap, model: RewardModel, horizon: u32) -> Result<Self, GameError> {
        let vis = VisibilityOracle::build(&map);
        Self::new(map, vis, model, horizon)
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn visibility(&self) -> &VisibilityOracle {
        &self.vis
    }

    pub fn model(&self) -> &RewardModel {
        &self.model
    }

    pub fn penalty(&self) -> &Value {
        &self.model.penalty
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Same map and model, different horizon.
    pub fn with_horizon(&self, horizon: u32) -> Scenario {
        Scenario { horizon, ..self.clone() }
    }

    /// Same map and horizon, different penalty.
    pub fn with_penalty(&self, penalty: Value) -> Result<Scenario, GameError> {
        let model = RewardModel { penalty, ..self.model.clone() };
        model.validate(&self.map)?;
        Ok(Scenario { model, ..self.clone() })
    }

    /// Total weight of all free cells.
    pub fn total_weight(&self) -> &Value {
        &self.total_weight
    }

    pub fn initial_state(&self) -> GameState {
        let agent = self.map.agent_start();
        GameState {
            agent,
            guard: self.map.guard_start(),
            scanned: self.vis.vis(agent).clone(),
            reward: Value::zero(),
            detections: 0,
            step: 0,
            to_move: Side::Agent,
        }
    }

    #[inline]
    pub fn is_terminal(&self, state: &GameState) -> bool {
        state.step >= self.horizon
    }

    /// Moves for the side to move: stay first, then free 4-neighbours.
    pub fn legal_actions(&self, state: &GameState) -> Actions {
        let from = match state.to_move {
            Side::Agent => state.agent,
            Side::Guard => state.guard,
        };
        let mut out = Actions::new();
        out.push(from);
        out.extend(self.map.neighbors(from));
        out
    }

    fn check_move(&self, state: &GameState, side: Side, dest: CellIndex) -> Result<(), GameError> {
        if self.is_terminal(state) {
            return Err(GameError::GameOver);
        }
        if state.to_move != side {
            return Err(GameError::WrongSide { expected: state.to_move, got: side });
        }
        if !self.legal_actions(state).contains(&dest) {
            let coord = if self.map.contains(dest) { self.map.coord(dest) } else { Coord::new(usize::MAX, usize::MAX) };
            return Err(GameError::IllegalMove(coord));
        }
        Ok(())
    }

    pub fn apply_agent_move(&self, state: &GameState, dest: CellIndex) -> Result<GameState, GameError> {
        self.check_move(state, Side::Agent, dest)?;
        Ok(self.agent_step(state, dest))
    }

    pub fn apply_guard_move(&self, state: &GameState, dest: CellIndex) -> Result<GameState, GameError> {
        self.check_move(state, Side::Guard, dest)?;
        Ok(self.guard_step(state, dest))
    }

    /// Applies a move for whichever side is to move.
    pub fn apply(&self, state: &GameState, dest: CellIndex) -> Result<GameState, GameError> {
        match state.to_move {
            Side::Agent => self.apply_agent_move(state, dest),
            Side::Guard => self.apply_guard_move(state, dest),
        }
    }

    /// Plays alternating moves from `start`, returning every state visited (including `start`).
    pub fn replay(&self, start: &GameState, moves: &[CellIndex]) -> Result<Vec<GameState>, GameError> {
        let mut states = Vec::with_capacity(moves.len() + 1);
        states.push(start.clone());
        for &m in moves {
            let next = self.apply(states.last().expect("non-empty"), m)?;
            states.push(next);
        }
        Ok(states)
    }

    /// Unchecked move for search internals; `dest` must come from `legal_actions`.
    #[inline]
    pub(crate) fn step_unchecked(&self, state: &GameState, dest: CellIndex) -> GameState {
        match state.to_move {
            Side::Agent => self.agent_step(state, dest),
            Side::Guard => self.guard_step(state, dest),
        }
    }

    fn agent_step(&self, state: &GameState, dest: CellIndex) -> GameState {
        let mut next = state.clone();
        next.agent = dest;
        match self.model.mode {
            Mode::Scout => {
                next.reward += self.vis.new_weight(&self.map, dest, &state.scanned);
                next.scanned.union_in_place(self.vis.vis(dest));
            }
            Mode::Goal => {
                next.reward += self.goal_gain(dest);
                next.scanned.union_in_place(self.vis.vis(dest));
            }
        }
        next.to_move = Side::Guard;
        next
    }

    fn guard_step(&self, state: &GameState, dest: CellIndex) -> GameState {
        let mut next = state.clone();
        next.guard = dest;
        if dest == state.agent || self.vis.sees(dest, state.agent) {
            next.detections += 1;
        }
        next.step += 1;
        next.to_move = Side::Agent;
        next
    }

    /// Goal-mode gain for standing on `cell`.
    pub fn goal_gain(&self, cell: CellIndex) -> Value {
        match self.model.goal {
            Some(goal) => {
                let d = self.map.coord(cell).manhattan(self.map.coord(goal));
                Value::new(1, 1 + d as i128)
            }
            None => Value::zero(),
        }
    }

    /// `R − η·P` for the play so far.
    #[inline]
    pub fn objective_value(&self, state: &GameState) -> Value {
        state.reward - self.model.penalty * Value::from_integer(state.detections as i128)
    }

    /// Detections that can still happen from this state.
    #[inline]
    pub fn remaining_steps(&self, state: &GameState) -> u32 {
        self.horizon.saturating_sub(state.step)
    }

    /// Agent moves still to be played from this state.
    pub fn remaining_agent_moves(&self, state: &GameState) -> u32 {
        match state.to_move {
            Side::Agent => self.remaining_steps(state),
            Side::Guard => self.remaining_steps(state).saturating_sub(1),
        }
    }

    /// Upper bound on positive reward still obtainable from `state`.
    ///
    /// Scout mode: weight of unscanned free cells, computed in O(1) from the
    /// identity `reward = weight(scanned) − weight(vis(agent_start))`.
    /// Goal mode: remaining agent moves times the maximum per-cell gain of 1.
    #[inline]
    pub fn remaining_reward_bound(&self, state: &GameState) -> Value {
        match self.model.mode {
            Mode::Scout => self.total_weight - self.start_weight - state.reward,
            Mode::Goal => Value::from_integer(self.remaining_agent_moves(state) as i128) * Value::one(),
        }
    }

    /// Weight of free cells not in `state.scanned`, by explicit enumeration.
    pub fn unscanned_weight(&self, state: &GameState) -> Value {
        self.map
            .free_cells()
            .filter(|&c| !state.scanned.contains(c))
            .fold(Value::zero(), |acc, c| acc + self.map.weight(c))
    }
}
