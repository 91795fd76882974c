#![allow(dead_code)]

use std::io::Write;

use num_traits::Zero;
use scout_duel::game::{GameState, RewardModel, Scenario, Side};
use scout_duel::gridworld::{CellIndex, Coord, GridMap};
use scout_duel::value::Value;

pub fn scout(map: GridMap, penalty: Value, horizon: u32) -> Scenario {
    Scenario::with_map(map, RewardModel::scout(penalty), horizon).unwrap()
}

/// Line of sight by marching along the segment in floating point.
///
/// Traces from the row-major smaller endpoint; at every integer step of the
/// major axis the minor coordinate is `f64::round` of the exact line.
pub fn los_reference(map: &GridMap, a: Coord, b: Coord) -> bool {
    let (a, b) = if (a.row, a.col) <= (b.row, b.col) { (a, b) } else { (b, a) };
    let (r0, c0) = (a.row as f64, a.col as f64);
    let (dr, dc) = (b.row as f64 - r0, b.col as f64 - c0);
    let len = dr.abs().max(dc.abs());
    let steps = len as i64;
    (1..steps).all(|k| {
        let t = k as f64 / len;
        let (r, c) = if dc.abs() >= dr.abs() {
            ((r0 + dr * t).round(), c0 + dc.signum() * k as f64)
        } else {
            (r0 + dr.signum() * k as f64, (c0 + dc * t).round())
        };
        !map.is_obstacle(map.cell(r as usize, c as usize))
    })
}

/// Smallest and largest final objective over every completion of `state`.
pub fn completion_range(s: &Scenario, state: &GameState) -> (Value, Value) {
    if s.is_terminal(state) {
        let v = s.objective_value(state);
        return (v, v);
    }
    let mut lo: Option<Value> = None;
    let mut hi: Option<Value> = None;
    for a in s.legal_actions(state) {
        let (l, h) = completion_range(s, &s.apply(state, a).unwrap());
        lo = Some(lo.map_or(l, |x| x.min(l)));
        hi = Some(hi.map_or(h, |x| x.max(h)));
    }
    (lo.unwrap(), hi.unwrap())
}

/// Exact minimax value of any state.
pub fn minimax_value(s: &Scenario, state: &GameState) -> Value {
    if s.is_terminal(state) {
        return s.objective_value(state);
    }
    let values = s.legal_actions(state).into_iter().map(|a| minimax_value(s, &s.apply(state, a).unwrap()));
    match state.to_move {
        Side::Agent => values.max().unwrap(),
        Side::Guard => values.min().unwrap(),
    }
}

/// Checks every node against its pruning envelope; returns (nodes, violations).
pub fn envelope_violations(s: &Scenario) -> (usize, usize) {
    let p = *s.penalty();
    let (mut nodes, mut bad) = (0, 0);
    for_each_state(s, &s.initial_state(), &mut |state| {
        let summary = scout_duel::pruning::NodeSummary::of(s, state);
        let (lo, hi) = completion_range(s, state);
        if summary.worst_case(s.horizon(), &p) > lo || hi > summary.best_case(&p) {
            bad += 1;
        }
        nodes += 1;
    });
    (nodes, bad)
}

/// Visits every state of the game tree below `state` (inclusive).
pub fn for_each_state(s: &Scenario, state: &GameState, f: &mut impl FnMut(&GameState)) {
    f(state);
    if s.is_terminal(state) {
        return;
    }
    for a in s.legal_actions(state) {
        for_each_state(s, &s.apply(state, a).unwrap(), f);
    }
}

/// Value for the side to move, written as negamax.
pub fn negamax(s: &Scenario, state: &GameState) -> Value {
    if s.is_terminal(state) {
        let v = s.objective_value(state);
        return if state.to_move == Side::Agent { v } else { -v };
    }
    s.legal_actions(state)
        .into_iter()
        .map(|a| -negamax(s, &s.apply(state, a).unwrap()))
        .max()
        .unwrap_or_else(Value::zero)
}

pub fn cell(map: &GridMap, row: usize, col: usize) -> CellIndex {
    map.cell(row, col)
}

/// Writes straight to stderr so the line shows even when output is captured.
pub fn report_line(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}
