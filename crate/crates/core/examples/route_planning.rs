//! Nearest-neighbour construction followed by 2-opt on a random scatter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wildfire_swarm::fire_world::{Cell, PointId, PositionMap, SurveyPoint};
use wildfire_swarm::routing::{nn_route, route_length, two_opt, DEFAULT_MAX_PASSES};
use wildfire_swarm::Point;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let points: Vec<SurveyPoint> = (0..40)
        .map(|i| SurveyPoint {
            id: PointId(i),
            position: Point::new(rng.random_range(0.0..8000.0), rng.random_range(0.0..8000.0)),
            cell: Cell::new(i as usize, 0),
        })
        .collect();
    let positions: PositionMap = points.iter().map(|p| (p.id, p.position)).collect();
    let start = Point::new(4000.0, -500.0);

    let greedy = nn_route(0, start, &points);
    let improved = two_opt(&greedy, &positions, DEFAULT_MAX_PASSES)?;
    let (a, b) = (route_length(&greedy, &positions)?, route_length(&improved, &positions)?);
    println!("nearest neighbour: {:.0} m", a);
    println!("after 2-opt:       {:.0} m ({:.1}% shorter)", b, 100.0 * (a - b) / a);
    println!("flight time at 15 m/s: {:.1} min", b / 15.0 / 60.0);
    assert!(b <= a + 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
