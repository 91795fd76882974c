//! Adversarial visibility planning on grids.
//!
//! A scout agent earns reward for scanning new cells (or approaching a goal)
//! while an adversarial guard tries to keep it in view; every time step that
//! ends with the agent visible costs a fixed penalty. The crate solves the
//! resulting finite-horizon zero-sum game exactly with minimax (alpha-beta
//! plus structural sibling-dominance pruning) or approximately with MCTS,
//! and ships a brute-force oracle and an experiment harness to audit both.



pub mod bench;
pub mod game;
pub mod gridworld;
pub mod mcts;
pub mod minimax;
pub mod oracle;
pub mod par;
pub mod pruning;
pub mod report;

pub mod value;

pub use game::{GameState, Mode, RewardModel, Scenario, Side};
pub use gridworld::{CellIndex, CellSet, Coord, GridMap, VisibilityOracle};
pub use mcts::{mcts_search, MctsConfig, MctsResult};
pub use minimax::{minimax_search, ChildOrder, PruningLevel, SearchConfig, SearchResult, SearchStats};
pub use oracle::{brute_force_value, OracleResult};
pub use value::Value;
