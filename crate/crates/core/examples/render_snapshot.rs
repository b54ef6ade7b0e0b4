//! Runs a small two-UAV mission and renders the launch frame and the final
//! frame as SVG. Pass a directory to keep the images.

use std::path::PathBuf;

use wildfire_swarm::fire_world::{FireMask, FireScenario, FireSpreadParams};
use wildfire_swarm::render::{render_svg, select, RenderOptions};
use wildfire_swarm::sim::{run, ScenarioConfig};
use wildfire_swarm::Point;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mask = FireMask::from_rows(
        &["00110000", "01111100", "11111110", "01111110", "00111100", "00011000"],
        450.0,
        Point::new(0.0, 0.0),
    )?;
    let fire = FireScenario {
        initial: mask,
        spread: FireSpreadParams::default(),
        updates: 1,
    };
    let config = ScenarioConfig::new(2, Point::new(1800.0, -600.0), fire);
    let out = run(&config)?;

    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    for (name, at) in [("launch", Some(0.0)), ("final", None)] {
        let (frame, plan) = select(&out.stream, &RenderOptions { update_index: None, at_s: at })?;
        let svg = render_svg(&frame, plan.as_ref());
        let path = dir.join(format!("wildfire-swarm-{name}.svg"));
        std::fs::write(&path, &svg)?;
        println!(
            "{}: t = {} s, {} routes, {} point groups",
            path.display(),
            frame.t_s,
            svg.matches("<polyline").count(),
            svg.matches("class=\"uav-points\"").count()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
