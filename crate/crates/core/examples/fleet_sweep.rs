//! Fleet-size sweep over a few seeds, written to a temporary directory.

use std::fs;

use wildfire_swarm::commands::sweep_command;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let scenario = dir.path().join("scenario.toml");
    fs::write(&scenario, "uav.count = 8\nplanner.kind = \"cluster\"\n")?;

    let table = sweep_command(&scenario, &[], &[8, 12], &[1, 2, 3], &dir.path().join("sweep"))?;
    print!("{}", table.to_csv());
    let mean = |fleet| table.rows.iter().find(|r| r.fleet == fleet).and_then(|r| r.mean_completion_time_s);
    if let (Some(a), Some(b)) = (mean(8), mean(12)) {
        println!("12 UAVs finish {:.1} min sooner on average", (a - b) / 60.0);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
