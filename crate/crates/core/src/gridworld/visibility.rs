use num_traits::Zero;

use super::{CellIndex, CellSet, GridError, GridMap};
use crate::par::{self, Execution};
use crate::value::Value;

/// Cells strictly between `a` and `b` on the Bresenham line joining their centers.
///
/// The line is traced from the smaller endpoint. At each step along the major
/// axis the minor coordinate is the exact line rounded to the nearest integer,
/// with ties going to the larger coordinate.
pub fn interior_cells(map: &GridMap, a: CellIndex, b: CellIndex) -> Vec<CellIndex> {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let pa = map.coord(a);
    let pb = map.coord(b);
    let (r0, c0) = (pa.row as i64, pa.col as i64);
    let dr = pb.row as i64 - r0;
    let dc = pb.col as i64 - c0;
    let mut out = Vec::new();
    if dc.abs() >= dr.abs() {
        let len = dc.abs();
        for k in 1..len {
            let col = c0 + k * dc.signum();
            let row = round_ratio(r0 * len + k * dr, len);
            out.push(map.cell(row as usize, col as usize));
        }
    } else {
        let len = dr.abs();
        for k in 1..len {
            let row = r0 + k * dr.signum();
            let col = round_ratio(c0 * len + k * dc, len);
            out.push(map.cell(row as usize, col as usize));
        }
    }
    out
}

/// `num / den` rounded to nearest, ties toward +inf. `den > 0`.
#[inline]
fn round_ratio(num: i64, den: i64) -> i64 {
    (2 * num + den).div_euclid(2 * den)
}

fn check_free(map: &GridMap, c: CellIndex) -> Result<(), GridError> {
    if !map.contains(c) {
        return Err(GridError::CellOutOfRange(c.index()));
    }
    if map.is_obstacle(c) {
        return Err(GridError::Obstacle(map.coord(c)));
    }
    Ok(())
}

/// True iff no cell strictly between `a` and `b` is an obstacle.
pub fn line_of_sight(map: &GridMap, a: CellIndex, b: CellIndex) -> Result<bool, GridError> {
    check_free(map, a)?;
    check_free(map, b)?;
    Ok(clear_line(map, a, b))
}

fn clear_line(map: &GridMap, a: CellIndex, b: CellIndex) -> bool {
    interior_cells(map, a, b).into_iter().all(|c| !map.is_obstacle(c))
}

/// Precomputed visibility set for every free cell.
#[derive(Debug, Clone)]
pub struct VisibilityOracle {
    sets: Vec<CellSet>,
    range: Option<f64>,
}

impl VisibilityOracle {
    /// Unlimited sensing range.
    pub fn build(map: &GridMap) -> Self {
        Self::build_with(map, None, Execution::Parallel)
    }

    /// Sensing limited to cells whose centers lie within `range` (Euclidean).
    pub fn build_with_range(map: &GridMap, range: f64) -> Self {
        Self::build_with(map, Some(range), Execution::Parallel)
    }

    pub fn build_with(map: &GridMap, range: Option<f64>, exec: Execution) -> Self {
        let n = map.num_cells();
        let in_range = |a: CellIndex, b: CellIndex| match range {
            None => true,
            Some(r) => {
                let (pa, pb) = (map.coord(a), map.coord(b));
                let dr = pa.row.abs_diff(pb.row) as f64;
                let dc = pa.col.abs_diff(pb.col) as f64;
                dr * dr + dc * dc <= r * r
            }
        };
        // Each row only traces pairs (a, b) with b > a; symmetry fills the rest.
        let upper: Vec<Vec<CellIndex>> = par::map_range(exec, n, |i| {
            let a = CellIndex::new(i);
            if map.is_obstacle(a) {
                return Vec::new();
            }
            ((i + 1)..n)
                .map(CellIndex::new)
                .filter(|&b| !map.is_obstacle(b) && in_range(a, b) && clear_line(map, a, b))
                .collect()
        });
        let mut sets = vec![CellSet::empty(n); n];
        for a in map.free_cells() {
            sets[a.index()].insert(a);
        }
        for (i, row) in upper.iter().enumerate() {
            for &b in row {
                sets[i].insert(b);
                sets[b.index()].insert(CellIndex::new(i));
            }
        }
        VisibilityOracle { sets, range }
    }

    pub fn range(&self) -> Option<f64> {
        self.range
    }

    /// Visibility set of `cell`; empty for obstacle cells.
    #[inline]
    pub fn vis(&self, cell: CellIndex) -> &CellSet {
        &self.sets[cell.index()]
    }

    #[inline]
    pub fn sees(&self, from: CellIndex, to: CellIndex) -> bool {
        self.sets[from.index()].contains(to)
    }

    /// Weight of the cells visible from `pos` that are not already scanned.
    pub fn visible_weight(&self, map: &GridMap, pos: CellIndex, already_scanned: &CellSet) -> Result<Value, GridError> {
        check_free(map, pos)?;
        let vis = self.vis(pos);
        if vis.capacity() != already_scanned.capacity() {
            return Err(GridError::CapacityMismatch { left: vis.capacity(), right: already_scanned.capacity() });
        }
        Ok(self.new_weight(map, pos, already_scanned))
    }

    /// Unchecked form of [`visible_weight`](Self::visible_weight).
    #[inline]
    pub(crate) fn new_weight(&self, map: &GridMap, pos: CellIndex, scanned: &CellSet) -> Value {
        let vis = self.vis(pos);
        if map.has_unit_weights() {
            Value::from_integer(vis.count_new(scanned) as i128)
        } else {
            vis.iter_new(scanned).fold(Value::zero(), |acc, c| acc + map.weight(c))
        }
    }
}
