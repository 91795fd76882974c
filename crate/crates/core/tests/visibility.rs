mod common;

use proptest::prelude::*;
use scout_duel::bench::random_map;
use scout_duel::gridworld::{line_of_sight, Coord, GridMap, VisibilityOracle};
use scout_duel::par::Execution;

use common::los_reference;

fn check_against_reference(map: &GridMap) {
    let vis = VisibilityOracle::build(map);
    for a in map.free_cells() {
        for b in map.free_cells() {
            let expected = los_reference(map, map.coord(a), map.coord(b));
            assert_eq!(vis.sees(a, b), expected, "{:?} -> {:?} on\n{}", map.coord(a), map.coord(b), map.to_text());
            assert_eq!(line_of_sight(map, a, b).unwrap(), expected);
        }
    }
}

#[test]
fn exhaustive_pairs_match_ray_march() {
    for seed in 0..40 {
        for (w, h) in [(8, 8), (5, 7), (8, 3), (2, 6)] {
            for density in [0.0, 0.2, 0.4] {
                check_against_reference(&random_map(seed, w, h, density).unwrap());
            }
        }
    }
}

#[test]
fn center_block_hides_far_corner_wedge() {
    let map = GridMap::parse("5 5\nA....\n.....\n..#..\n.....\n....G\n").unwrap();
    let vis = VisibilityOracle::build(&map);
    let corner = map.cell(0, 0);
    let reference = map.free_cells().filter(|&b| los_reference(&map, Coord::new(0, 0), map.coord(b))).count();
    assert_eq!(reference, 20);
    assert_eq!(vis.vis(corner).len(), 20);
    for hidden in [(3, 3), (4, 4), (3, 4), (4, 3)] {
        assert!(!vis.sees(corner, map.cell(hidden.0, hidden.1)));
    }
}

#[test]
fn sequential_build_matches_parallel() {
    let map = random_map(5, 8, 8, 0.3).unwrap();
    let a = VisibilityOracle::build_with(&map, None, Execution::Sequential);
    let b = VisibilityOracle::build_with(&map, None, Execution::Parallel);
    for c in map.free_cells() {
        assert_eq!(a.vis(c), b.vis(c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn visibility_is_symmetric_and_reflexive(seed in 0u64..10_000, w in 2usize..9, h in 2usize..9, d in 0.0f64..0.4) {
        let map = random_map(seed, w, h, d).unwrap();
        let vis = VisibilityOracle::build(&map);
        for a in map.free_cells() {
            prop_assert!(vis.sees(a, a));
            for b in vis.vis(a).iter() {
                prop_assert!(map.is_free(b));
                prop_assert!(vis.sees(b, a));
            }
        }
    }

    #[test]
    fn range_limit_only_removes_cells(seed in 0u64..10_000, r in 0.0f64..6.0) {
        let map = random_map(seed, 7, 7, 0.2).unwrap();
        let full = VisibilityOracle::build(&map);
        let near = VisibilityOracle::build_with_range(&map, r);
        for a in map.free_cells() {
            prop_assert!(near.vis(a).is_subset(full.vis(a)).unwrap());
            for b in near.vis(a).iter() {
                let (pa, pb) = (map.coord(a), map.coord(b));
                let d2 = (pa.row.abs_diff(pb.row).pow(2) + pa.col.abs_diff(pb.col).pow(2)) as f64;
                prop_assert!(d2 <= r * r);
            }
        }
    }
}
