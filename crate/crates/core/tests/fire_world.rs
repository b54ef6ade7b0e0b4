mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{boundary_oracle, random_mask};
use wildfire_swarm::fire_world::{
    extract_boundary, generate_survey_points, step_fire, Cell, FireMask, FireSpreadParams, Neighborhood,
};
use wildfire_swarm::Point;

fn neighborhood(four: bool) -> Neighborhood {
    if four {
        Neighborhood::Four
    } else {
        Neighborhood::Eight
    }
}

proptest! {
    #[test]
    fn spread_never_extinguishes(mask_seed in 0u64..10_000, seed in any::<u64>(), p in 0.0f64..=1.0, four in any::<bool>()) {
        let mask = random_mask(&mut ChaCha8Rng::seed_from_u64(mask_seed), 16);
        let params = FireSpreadParams { ignition_probability: p, neighborhood: neighborhood(four), steps_per_update: 1 };
        let next = step_fire(&mask, &params, seed);
        for c in mask.burning_cells() {
            prop_assert!(next.is_burning(c));
        }
        prop_assert!(next.same_geometry(&mask));
    }

    #[test]
    fn boundary_matches_neighbour_scan(mask_seed in 0u64..100_000) {
        let mask = random_mask(&mut ChaCha8Rng::seed_from_u64(mask_seed), 12);
        let got: BTreeSet<(usize, usize)> = extract_boundary(&mask).into_iter().map(|c| (c.col, c.row)).collect();
        prop_assert_eq!(got, boundary_oracle(&mask));
    }

    #[test]
    fn survey_grid_tiles_the_fire(mask_seed in 0u64..10_000, cell in prop::sample::select(vec![100.0, 250.0, 450.0])) {
        let mask = random_mask(&mut ChaCha8Rng::seed_from_u64(mask_seed), 24);
        let survey = generate_survey_points(&mask, cell);
        prop_assert_eq!(&survey, &generate_survey_points(&mask.clone(), cell));
        let half = cell / 2.0;
        let inside = |p: Point, q: Point| {
            q.x >= p.x - half && q.x < p.x + half && q.y >= p.y - half && q.y < p.y + half
        };
        let centers: Vec<Point> = mask.burning_cells().map(|c| mask.cell_center(c)).collect();
        for c in &centers {
            let owners = survey.points.iter().filter(|s| inside(s.position, *c)).count();
            prop_assert_eq!(owners, 1);
        }
        for s in &survey.points {
            prop_assert!(centers.iter().any(|c| inside(s.position, *c)));
        }
        let ids: Vec<u32> = survey.points.iter().map(|p| p.id.0).collect();
        prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn ids_survive_growth() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let mut mask = random_mask(&mut r, 30);
    let params = FireSpreadParams {
        ignition_probability: 0.3,
        ..FireSpreadParams::default()
    };
    for step in 0..5 {
        let before = generate_survey_points(&mask, 450.0);
        mask = step_fire(&mask, &params, step);
        let after = generate_survey_points(&mask, 450.0);
        for p in &before.points {
            let q = after.get(p.id).expect("point kept");
            assert_eq!(q.position, p.position);
            assert_eq!(q.cell, p.cell);
        }
    }
}

#[test]
fn four_new_grid_cells_add_four_points() {
    let mut mask = FireMask::new(12, 12, 150.0, Point::new(0.0, 0.0)).unwrap();
    for r in 0..3 {
        for c in 0..3 {
            mask.set(Cell::new(c, r), true);
        }
    }
    let before = generate_survey_points(&mask, 450.0);
    for (c, r) in [(3, 0), (0, 3), (6, 6), (9, 9)] {
        mask.set(Cell::new(c, r), true);
    }
    let after = generate_survey_points(&mask, 450.0);
    assert_eq!(after.len(), before.len() + 4);
    assert!(before.ids().is_subset(&after.ids()));
}

#[test]
fn mask_text_round_trip() {
    let mask = random_mask(&mut ChaCha8Rng::seed_from_u64(8), 9);
    assert_eq!(FireMask::parse(&mask.to_text()).unwrap(), mask);
}
