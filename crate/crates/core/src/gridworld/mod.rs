//! Grid maps, cell sets and line-of-sight visibility.

mod cellset;
mod map;
mod visibility;

pub use cellset::CellSet;
pub use map::{CellIndex, Coord, GridMap, MapError, MAX_CELLS};
pub use visibility::{interior_cells, line_of_sight, VisibilityOracle};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("cell {0} is an obstacle")]
    Obstacle(Coord),
    #[error("cell {0} is out of bounds")]
    OutOfBounds(Coord),
    #[error("cell index {0} is outside the map")]
    CellOutOfRange(usize),
    #[error("cell set capacity mismatch: {left} vs {right}")]
    CapacityMismatch { left: usize, right: usize },
}
