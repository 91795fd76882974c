use std::fmt;

use num_traits::{One, Zero};

use super::{CellSet, GridError};
use crate::value::{format_value, parse_value, Value};

/// Largest supported map area (64×64).
pub const MAX_CELLS: usize = 64 * 64;

/// Row-major scalar index of a cell: `row * width + col`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct CellIndex(u16);

impl CellIndex {
    #[inline]
    pub fn new(index: usize) -> Self {
        debug_assert!(index < MAX_CELLS);
        CellIndex(index as u16)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
}

impl Coord {
    pub fn new(row: usize, col: usize) -> Self {
        Coord { row, col }
    }

    pub fn manhattan(self, other: Coord) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("invalid map: {0}")]
    Invalid(String),
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> MapError {
    MapError::Syntax { line, col, msg: msg.into() }
}

/// An immutable grid map with obstacles, per-cell reward weights and start cells.
#[derive(Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    obstacles: CellSet,
    weights: Vec<Value>,
    agent_start: CellIndex,
    guard_start: CellIndex,
    unit_weights: bool,
}

impl GridMap {
    /// Builds a validated map. Free cells without an explicit weight get weight 1.
    pub fn new(
        width: usize,
        height: usize,
        obstacles: impl IntoIterator<Item = Coord>,
        weights: impl IntoIterator<Item = (Coord, Value)>,
        agent_start: Coord,
        guard_start: Coord,
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::Invalid("width and height must be at least 1".into()));
        }
        if width * height > MAX_CELLS || width > 64 || height > 64 {
            return Err(MapError::Invalid(format!("{width}x{height} exceeds the 64x64 capacity")));
        }
        let n = width * height;
        let in_bounds = |c: Coord| c.row < height && c.col < width;
        let mut obstacle_set = CellSet::empty(n);
        for c in obstacles {
            if !in_bounds(c) {
                return Err(MapError::Invalid(format!("obstacle {c} out of bounds")));
            }
            obstacle_set.insert(CellIndex::new(c.row * width + c.col));
        }
        let mut w = vec![Value::one(); n];
        for c in obstacle_set.iter() {
            w[c.index()] = Value::zero();
        }
        for (c, v) in weights {
            if !in_bounds(c) {
                return Err(MapError::Invalid(format!("weight cell {c} out of bounds")));
            }
            let idx = c.row * width + c.col;
            if obstacle_set.contains(CellIndex::new(idx)) {
                return Err(MapError::Invalid(format!("weight on obstacle cell {c}")));
            }
            if v < Value::zero() {
                return Err(MapError::Invalid(format!("negative weight at {c}")));
            }
            w[idx] = v;
        }
        for (name, c) in [("agent", agent_start), ("guard", guard_start)] {
            if !in_bounds(c) {
                return Err(MapError::Invalid(format!("{name} start {c} out of bounds")));
            }
            if obstacle_set.contains(CellIndex::new(c.row * width + c.col)) {
                return Err(MapError::Invalid(format!("{name} start {c} is an obstacle")));
            }
        }
        let unit_weights = (0..n).all(|i| {
            let c = CellIndex::new(i);
            obstacle_set.contains(c) || w[i].is_one()
        });
        Ok(GridMap {
            width,
            height,
            obstacles: obstacle_set,
            weights: w,
            agent_start: CellIndex::new(agent_start.row * width + agent_start.col),
            guard_start: CellIndex::new(guard_start.row * width + guard_start.col),
            unit_weights,
        })
    }

    /// Parses the text map format: a `<width> <height>` header, `height` rows of
    /// `.#AG`, then optional `weight <row> <col> <value>` lines.
    pub fn parse(text: &str) -> Result<Self, MapError> {
        let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).enumerate();
        let (_, header) = lines.next().ok_or_else(|| syntax(1, 1, "empty input"))?;
        let mut fields = header.split_whitespace();
        let mut dim = |what: &str| -> Result<usize, MapError> {
            let tok = fields.next().ok_or_else(|| syntax(1, 1, format!("missing {what} in header")))?;
            let col = header.find(tok).unwrap_or(0) + 1;
            tok.parse::<usize>().map_err(|_| syntax(1, col, format!("invalid {what} {tok:?}")))
        };
        let width = dim("width")?;
        let height = dim("height")?;
        if fields.next().is_some() {
            return Err(syntax(1, 1, "header must be exactly `<width> <height>`"));
        }
        if width == 0 || height == 0 || width > 64 || height > 64 {
            return Err(syntax(1, 1, format!("dimensions {width}x{height} outside 1..=64")));
        }

        let mut obstacles = Vec::new();
        let mut agent = None;
        let mut guard = None;
        for row in 0..height {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| syntax(row + 2, 1, format!("expected {height} map rows, found {row}")))?;
            let line_no = ln + 1;
            let chars: Vec<char> = line.chars().collect();
            if chars.len() != width {
                return Err(syntax(
                    line_no,
                    chars.len().min(width) + 1,
                    format!("row has {} cells, expected {width}", chars.len()),
                ));
            }
            for (col, ch) in chars.into_iter().enumerate() {
                let here = Coord::new(row, col);
                match ch {
                    '.' => {}
                    '#' => obstacles.push(here),
                    'A' => {
                        if agent.replace(here).is_some() {
                            return Err(syntax(line_no, col + 1, "duplicate 'A'"));
                        }
                    }
                    'G' => {
                        if guard.replace(here).is_some() {
                            return Err(syntax(line_no, col + 1, "duplicate 'G'"));
                        }
                    }
                    other => return Err(syntax(line_no, col + 1, format!("unexpected character {other:?}"))),
                }
            }
        }
        let agent = agent.ok_or_else(|| syntax(2, 1, "missing 'A'"))?;
        let guard = guard.ok_or_else(|| syntax(2, 1, "missing 'G'"))?;

        let mut weights = Vec::new();
        for (ln, line) in lines {
            let line_no = ln + 1;
            if line.trim().is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 || toks[0] != "weight" {
                return Err(syntax(line_no, 1, "expected `weight <row> <col> <value>`"));
            }
            let row: usize = toks[1].parse().map_err(|_| syntax(line_no, 8, "invalid row"))?;
            let col: usize = toks[2].parse().map_err(|_| syntax(line_no, 8, "invalid column"))?;
            if row >= height || col >= width {
                return Err(syntax(line_no, 8, format!("weight cell ({row},{col}) out of bounds")));
            }
            if obstacles.contains(&Coord::new(row, col)) {
                return Err(syntax(line_no, 1, format!("weight on obstacle cell ({row},{col})")));
            }
            let value = parse_value(toks[3]).map_err(|e| syntax(line_no, 1, e.to_string()))?;
            if value < Value::zero() {
                return Err(syntax(line_no, 1, "weights must be non-negative"));
            }
            weights.push((Coord::new(row, col), value));
        }

        GridMap::new(width, height, obstacles, weights, agent, guard)
    }

    /// Serializes back into the text map format.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.width, self.height);
        for row in 0..self.height {
            for col in 0..self.width {
                let c = self.cell(row, col);
                out.push(if c == self.agent_start {
                    'A'
                } else if c == self.guard_start {
                    'G'
                } else if self.is_obstacle(c) {
                    '#'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
        for c in self.free_cells() {
            let w = &self.weights[c.index()];
            if !w.is_one() {
                let p = self.coord(c);
                out.push_str(&format!("weight {} {} {}\n", p.row, p.col, format_value(w)));
            }
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn agent_start(&self) -> CellIndex {
        self.agent_start
    }

    pub fn guard_start(&self) -> CellIndex {
        self.guard_start
    }

    pub fn obstacles(&self) -> &CellSet {
        &self.obstacles
    }

    #[inline]
    pub fn cell(&self, row: usize, col: usize) -> CellIndex {
        debug_assert!(row < self.height && col < self.width);
        CellIndex::new(row * self.width + col)
    }

    pub fn cell_at(&self, c: Coord) -> Result<CellIndex, GridError> {
        if c.row >= self.height || c.col >= self.width {
            return Err(GridError::OutOfBounds(c));
        }
        Ok(self.cell(c.row, c.col))
    }

    #[inline]
    pub fn coord(&self, cell: CellIndex) -> Coord {
        Coord::new(cell.index() / self.width, cell.index() % self.width)
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        cell.index() < self.num_cells()
    }

    #[inline]
    pub fn is_obstacle(&self, cell: CellIndex) -> bool {
        self.obstacles.contains(cell)
    }

    pub fn is_free(&self, cell: CellIndex) -> bool {
        self.contains(cell) && !self.is_obstacle(cell)
    }

    pub fn weight(&self, cell: CellIndex) -> &Value {
        &self.weights[cell.index()]
    }

    /// True when every free cell has weight exactly 1.
    pub fn has_unit_weights(&self) -> bool {
        self.unit_weights
    }

    pub fn free_cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.num_cells()).map(CellIndex::new).filter(|&c| !self.is_obstacle(c))
    }

    pub fn num_free(&self) -> usize {
        self.num_cells() - self.obstacles.len()
    }

    /// Sum of weights over all free cells.
    pub fn total_weight(&self) -> Value {
        self.weight_of(&CellSet::full(self.num_cells()))
    }

    /// Weighted size of a cell set.
    pub fn weight_of(&self, set: &CellSet) -> Value {
        if self.unit_weights {
            let free_members = set.len() - set.iter().filter(|&c| self.is_obstacle(c)).count();
            Value::from_integer(free_members as i128)
        } else {
            set.iter().fold(Value::zero(), |acc, c| acc + self.weights[c.index()])
        }
    }

    /// 4-connected free neighbours in [up, down, left, right] order.
    pub fn neighbors(&self, cell: CellIndex) -> impl Iterator<Item = CellIndex> + '_ {
        let Coord { row, col } = self.coord(cell);
        let up = (row > 0).then(|| self.cell(row - 1, col));
        let down = (row + 1 < self.height).then(|| self.cell(row + 1, col));
        let left = (col > 0).then(|| self.cell(row, col - 1));
        let right = (col + 1 < self.width).then(|| self.cell(row, col + 1));
        [up, down, left, right].into_iter().flatten().filter(|&c| !self.is_obstacle(c))
    }

    /// Whether all free cells form one 4-connected component.
    pub fn is_connected(&self) -> bool {
        let Some(first) = self.free_cells().next() else {
            return true;
        };
        let mut seen = CellSet::empty(self.num_cells());
        let mut stack = vec![first];
        seen.insert(first);
        while let Some(c) = stack.pop() {
            for n in self.neighbors(c) {
                if seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        seen.len() == self.num_free()
    }
}

impl fmt::Debug for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridMap:\n{}", self.to_text())
    }
}
