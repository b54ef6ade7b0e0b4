//! Grows the synthetic fire through a few boundary updates and prints how
//! the survey grid follows it.

use wildfire_swarm::fire_world::{extract_boundary, generate_survey_points, SyntheticFire};
use wildfire_swarm::sim::{eaton_fire, EATON_UPDATES};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let seed = 7;
    let scenario = eaton_fire(&SyntheticFire::eaton_scale(), seed);
    let masks = scenario.masks(seed);
    assert_eq!(masks.len(), EATON_UPDATES);

    println!("update  burning  boundary  survey points");
    let mut previous = 0;
    for (t, mask) in masks.iter().enumerate() {
        let survey = generate_survey_points(mask, 450.0);
        println!(
            "{t:>6}  {:>7}  {:>8}  {:>13}",
            mask.burning_count(),
            extract_boundary(mask).len(),
            survey.len()
        );
        // spread never extinguishes a cell
        assert!(mask.burning_count() >= previous);
        previous = mask.burning_count();
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
