//! Map generators for the experiment harness.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::BenchError;
use crate::gridworld::{Coord, GridMap};

/// Regeneration attempts before `random_map` gives up.
pub const MAX_ATTEMPTS: u32 = 1000;

/// Seeded random map with a connected free region and distinct free starts.
///
/// `density` is the obstacle fraction, rounded to a whole number of cells.
/// Each attempt reshuffles all cells; a disconnected layout is thrown away.
pub fn random_map(seed: u64, width: usize, height: usize, density: f64) -> Result<GridMap, BenchError> {
    if !(0.0..=0.4).contains(&density) {
        return Err(BenchError::Spec(format!("obstacle density {density} outside [0, 0.4]")));
    }
    let n = width * height;
    let blocked = (density * n as f64).round() as usize;
    if n < blocked + 2 {
        return Err(BenchError::Spec(format!("{width}x{height} has no room for two players")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<Coord> = (0..height).flat_map(|r| (0..width).map(move |c| Coord::new(r, c))).collect();
    for _ in 0..MAX_ATTEMPTS {
        cells.shuffle(&mut rng);
        let (obstacles, free) = cells.split_at(blocked);
        let map = GridMap::new(width, height, obstacles.iter().copied(), [], free[0], free[1])
            .map_err(|e| BenchError::Spec(e.to_string()))?;
        if map.is_connected() {
            return Ok(map);
        }
    }
    Err(BenchError::Generation { seed, attempts: MAX_ATTEMPTS })
}

/// Two rooms joined by a pair of corridors, players in opposite rooms.
///
/// Walking into the upper corridor scans it but puts the agent in the guard's
/// line of sight; staying in the left room scans less and stays hidden.
pub const DEMO_MAP: &str = "\
11 5
...#####...
.A.......G.
...#####...
...........
###########
";

pub fn demo_map() -> GridMap {
    GridMap::parse(DEMO_MAP).expect("demo map parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_is_open() {
        let m = random_map(3, 6, 6, 0.0).unwrap();
        assert_eq!(m.num_free(), 36);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(random_map(11, 6, 6, 0.3).unwrap(), random_map(11, 6, 6, 0.3).unwrap());
        assert_ne!(random_map(11, 6, 6, 0.3).unwrap(), random_map(12, 6, 6, 0.3).unwrap());
    }

    #[test]
    fn dense_maps_stay_valid() {
        for seed in 0..100 {
            let m = random_map(seed, 6, 6, 0.3).unwrap();
            assert!(m.is_connected());
            assert_eq!(m.num_free(), 36 - 11);
            assert!(m.is_free(m.agent_start()) && m.is_free(m.guard_start()));
            assert_ne!(m.agent_start(), m.guard_start());
        }
    }

    #[test]
    fn bad_density_is_rejected() {
        assert!(random_map(0, 6, 6, 0.5).is_err());
        assert!(random_map(0, 1, 2, 0.4).is_err());
    }
}
