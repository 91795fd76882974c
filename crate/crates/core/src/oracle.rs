//! Brute-force ground truth by complete game-tree enumeration.
//!
//! Shares only the transition code with the solvers. Root branches are
//! evaluated in parallel when the `parallel` feature is on.

use serde::Serialize;

use crate::game::{GameState, Scenario, Side};
use crate::gridworld::CellIndex;
use crate::par::{self, Execution};
use crate::value::Value;

/// Largest tree (by `5^plies`) the oracle agrees to enumerate.
pub const FEASIBILITY_LIMIT: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("tree too large: up to 5^{plies} = {estimate} leaves exceeds the {limit} limit")]
    Infeasible { plies: u32, estimate: u128, limit: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    #[serde(with = "crate::value::serde_value")]
    pub value: Value,
    /// Every root move achieving `value` (empty at a terminal root).
    pub optimal_actions_at_root: Vec<CellIndex>,
    pub total_nodes: u64,
    pub terminal_nodes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeConvention {
    AllNodes,
    TerminalOnly,
}

fn remaining_plies(scenario: &Scenario, state: &GameState) -> u32 {
    let steps = scenario.remaining_steps(state);
    match state.to_move {
        Side::Agent => 2 * steps,
        Side::Guard => (2 * steps).saturating_sub(1),
    }
}

fn check_feasible(scenario: &Scenario, root: &GameState) -> Result<(), OracleError> {
    let plies = remaining_plies(scenario, root);
    let estimate = 5u128.checked_pow(plies).unwrap_or(u128::MAX);
    if estimate > FEASIBILITY_LIMIT as u128 {
        return Err(OracleError::Infeasible { plies, estimate, limit: FEASIBILITY_LIMIT });
    }
    Ok(())
}

struct Tally {
    value: Value,
    total: u64,
    terminal: u64,
}

fn enumerate(scenario: &Scenario, state: &GameState) -> Tally {
    if scenario.is_terminal(state) {
        return Tally { value: scenario.objective_value(state), total: 1, terminal: 1 };
    }
    let mut total = 1;
    let mut terminal = 0;
    let mut best: Option<Value> = None;
    for action in scenario.legal_actions(state) {
        let child = scenario.apply(state, action).expect("legal action");
        let t = enumerate(scenario, &child);
        total += t.total;
        terminal += t.terminal;
        best = Some(match (best, state.to_move) {
            (None, _) => t.value,
            (Some(b), Side::Agent) => b.max(t.value),
            (Some(b), Side::Guard) => b.min(t.value),
        });
    }
    Tally { value: best.expect("stay is always legal"), total, terminal }
}

/// Exact minimax value of `root` by full enumeration.
pub fn brute_force_value(scenario: &Scenario, root: &GameState) -> Result<OracleResult, OracleError> {
    brute_force_value_with(scenario, root, Execution::Parallel)
}

pub fn brute_force_value_with(scenario: &Scenario, root: &GameState, exec: Execution) -> Result<OracleResult, OracleError> {
    check_feasible(scenario, root)?;
    if scenario.is_terminal(root) {
        return Ok(OracleResult {
            value: scenario.objective_value(root),
            optimal_actions_at_root: Vec::new(),
            total_nodes: 1,
            terminal_nodes: 1,
        });
    }
    let actions = scenario.legal_actions(root);
    let branches = par::map_slice(exec, &actions, |&a| {
        let child = scenario.apply(root, a).expect("legal action");
        (a, enumerate(scenario, &child))
    });
    let pick = |a: &Value, b: &Value| match root.to_move {
        Side::Agent => a.max(b).to_owned(),
        Side::Guard => a.min(b).to_owned(),
    };
    let value = branches.iter().map(|(_, t)| t.value).reduce(|a, b| pick(&a, &b)).expect("non-empty");
    let optimal: Vec<CellIndex> = branches.iter().filter(|(_, t)| t.value == value).map(|(a, _)| *a).collect();
    Ok(OracleResult {
        value,
        optimal_actions_at_root: optimal,
        total_nodes: 1 + branches.iter().map(|(_, t)| t.total).sum::<u64>(),
        terminal_nodes: branches.iter().map(|(_, t)| t.terminal).sum(),
    })
}

/// Exact values of every root move, in canonical order.
pub fn root_action_values(scenario: &Scenario, root: &GameState) -> Result<Vec<(CellIndex, Value)>, OracleError> {
    check_feasible(scenario, root)?;
    if scenario.is_terminal(root) {
        return Ok(Vec::new());
    }
    let actions = scenario.legal_actions(root);
    Ok(par::map_slice(Execution::Parallel, &actions, |&a| {
        let child = scenario.apply(root, a).expect("legal action");
        (a, enumerate(scenario, &child).value)
    }))
}

fn count(scenario: &Scenario, state: &GameState, convention: NodeConvention) -> u64 {
    if scenario.is_terminal(state) {
        return 1;
    }
    let own = match convention {
        NodeConvention::AllNodes => 1,
        NodeConvention::TerminalOnly => 0,
    };
    own + scenario
        .legal_actions(state)
        .into_iter()
        .map(|a| count(scenario, &scenario.apply(state, a).expect("legal action"), convention))
        .sum::<u64>()
}

/// Node count of the full tree under `convention`.
pub fn count_nodes(scenario: &Scenario, root: &GameState, convention: NodeConvention) -> Result<u64, OracleError> {
    check_feasible(scenario, root)?;
    Ok(count(scenario, root, convention))
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

    const OPEN: &str = "7 7\n.......\n.......\n..A....\n.......\n....G..\n.......\n.......\n";

    #[test]
    fn zero_horizon_is_root_only() {
        let s = scenario(OPEN, 3, 0);
        let r = brute_force_value(&s, &s.initial_state()).unwrap();
        assert_eq!((r.value, r.total_nodes, r.terminal_nodes), (int(0), 1, 1));
    }

    #[test]
    fn interior_counts_at_t1() {
        let s = scenario(OPEN, 3, 1);
        let r = brute_force_value(&s, &s.initial_state()).unwrap();
        assert_eq!((r.total_nodes, r.terminal_nodes), (31, 25));
        assert!(!r.optimal_actions_at_root.is_empty());
    }

    #[test]
    fn terminal_count_closed_form() {
        // 7x7 open with both players two cells from any wall: no clipping for T = 2.
        let s = scenario(OPEN, 3, 2);
        let root = s.initial_state();
        assert_eq!(count_nodes(&s, &root, NodeConvention::TerminalOnly).unwrap(), 5u64.pow(4));
        assert_eq!(count_nodes(&s, &root, NodeConvention::AllNodes).unwrap(), 1 + 5 + 25 + 125 + 625);
    }

    #[test]
    fn infeasible_is_refused() {
        let s = scenario(OPEN, 3, 6);
        assert!(matches!(brute_force_value(&s, &s.initial_state()), Err(OracleError::Infeasible { plies: 12, .. })));
        let s = scenario(OPEN, 3, 5);
        assert!(check_feasible(&s, &s.initial_state()).is_ok());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let s = scenario("5 4\nA.#..\n..#..\n.....\n...#G\n", 3, 2);
        let root = s.initial_state();
        assert_eq!(
            brute_force_value_with(&s, &root, Execution::Sequential).unwrap(),
            brute_force_value_with(&s, &root, Execution::Parallel).unwrap()
        );
    }
}
