//! Workload-balanced greedy assignment on a tiny instance, then what the
//! validator says about a tampered copy.

use std::collections::BTreeSet;

use wildfire_swarm::assignment::{
    correction_message, greedy_assign, validate_assignment, CorrectionContext, GreedyParams,
};
use wildfire_swarm::fire_world::{Cell, PointId, SurveyPoint, SurveySet};
use wildfire_swarm::Point;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let at = |id: u32, x: f64, y: f64| SurveyPoint {
        id: PointId(id),
        position: Point::new(x, y),
        cell: Cell::new(id as usize, 0),
    };
    let survey = SurveySet {
        update_index: 0,
        cell_size_m: 450.0,
        points: vec![at(1, 100.0, 0.0), at(2, 200.0, 0.0), at(3, 5000.0, 0.0)],
    };
    let uavs = [Point::new(0.0, 0.0), Point::new(5000.0, 100.0)];

    let plan = greedy_assign(&uavs, &survey, &GreedyParams::default());
    println!("greedy plan: {}", plan.to_json());

    let verdict = validate_assignment(&plan, &survey);
    println!("verdict: {verdict}");
    assert!(verdict.is_valid());

    let mut tampered = plan.clone();
    // point 1 flown twice, point 2 forgotten
    tampered.lists_mut()[1].push(PointId(1));
    tampered.lists_mut()[0].retain(|id| *id != PointId(2));
    let verdict = validate_assignment(&tampered, &survey);
    println!("tampered verdict: {verdict}");
    println!("correction:\n{}", correction_message(&verdict, CorrectionContext::Mission)?);

    let expected: BTreeSet<PointId> = survey.ids();
    assert_eq!(expected.len(), 3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
