//! A planner that keeps duplicating a point is corrected three times and
//! then replaced by the greedy fallback.

use wildfire_swarm::fire_world::{generate_survey_points, SyntheticFire};
use wildfire_swarm::planner::{
    build_mission_prompt, plan_with_validation, CorrectablePrompt, FaultKind, FaultConfig, PlannerKind, UavDescriptor,
    DEFAULT_MAX_RETRIES, DEFAULT_MISSION_COMMAND,
};
use wildfire_swarm::assignment::{validate_assignment, GreedyParams};
use wildfire_swarm::Point;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mask = SyntheticFire::eaton_scale().initial_mask(3);
    let survey = generate_survey_points(&mask, 450.0);
    let uavs = (0..4)
        .map(|id| UavDescriptor {
            id,
            position: Point::new(9000.0, 4500.0),
            energy_fraction: 1.0,
        })
        .collect();
    let prompt = build_mission_prompt(DEFAULT_MISSION_COMMAND, uavs, &survey);

    let flaky = PlannerKind::fault_injected(PlannerKind::Cluster, FaultConfig::always(FaultKind::Duplicate))?;
    let fallback = PlannerKind::Greedy(GreedyParams::default());
    let episode = plan_with_validation(&flaky, prompt, &survey, DEFAULT_MAX_RETRIES, &fallback)?;

    println!("planner: {}", episode.planner);
    for (i, outcome) in episode.outcomes.iter().enumerate() {
        match outcome.verdict() {
            Some(v) => println!("attempt {}: {v}", i + 1),
            None => println!("attempt {}: unparseable reply", i + 1),
        }
    }
    println!("fallback used: {}", episode.fallback_used);
    for c in episode.prompt.corrections() {
        println!("correction appended: {c}");
    }
    assert!(validate_assignment(&episode.final_assignment, &survey).is_valid());

    // a planner that only slips on its first try recovers without fallback
    let once = PlannerKind::fault_injected(PlannerKind::Cluster, FaultConfig::first_attempts(FaultKind::Drop, 1))?;
    let prompt = build_mission_prompt(DEFAULT_MISSION_COMMAND, episode.prompt.uavs.clone(), &survey);
    let recovered = plan_with_validation(&once, prompt, &survey, DEFAULT_MAX_RETRIES, &fallback)?;
    println!("drop-once planner: {} attempts, fallback {}", recovered.attempts, recovered.fallback_used);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
