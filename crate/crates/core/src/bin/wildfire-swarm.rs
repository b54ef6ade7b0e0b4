use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wildfire_swarm::commands::{
    parse_list, parse_seeds, run_command, sweep_command, CommandError, ConfigSource, RunRequest,
};
use wildfire_swarm::config::validate_config;
use wildfire_swarm::render::{render_file, RenderOptions};

#[derive(Parser)]
#[command(name = "wildfire-swarm", version, about = "UAV swarm wildfire survey simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlannerArg {
    Greedy,
    Cluster,
    Remote,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and print every resolved key.
    ValidateConfig { file: PathBuf },
    /// Run one scenario; exits 0 on full coverage, 2 if incomplete, 1 on error.
    Run {
        #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
        scenario: Option<PathBuf>,
        /// Repeat the run recorded in a manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        planner: Option<PlannerArg>,
    },
    /// Run every fleet size against every seed.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated fleet sizes, e.g. 8,12.
        #[arg(long)]
        fleets: String,
        /// Inclusive range `1..5` or a list `1,4,9`.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Draw one frame of a frame stream as SVG.
    Render {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        svg: PathBuf,
        /// First frame at or after this simulated time; default is the last frame.
        #[arg(long)]
        at: Option<f64>,
        #[arg(long)]
        update_index: Option<usize>,
    },
}

fn execute(cli: Cli) -> Result<u8, CommandError> {
    match cli.command {
        Command::ValidateConfig { file } => {
            let (resolved, _) = validate_config(&file)?;
            let mut out = std::io::stdout().lock();
            for (k, v) in resolved.values() {
                if writeln!(out, "{k} = {v}").is_err() {
                    break;
                }
            }
            Ok(0)
        }
        Command::Run {
            scenario,
            manifest,
            out,
            sets,
            seed,
            planner,
        } => {
            let source = match (scenario, manifest) {
                (Some(s), _) => ConfigSource::Scenario(s),
                (None, Some(m)) => ConfigSource::Manifest(m),
                (None, None) => return Err(CommandError::Usage("--scenario or --manifest is required".into())),
            };
            let planner = planner.map(|p| {
                match p {
                    PlannerArg::Greedy => "greedy",
                    PlannerArg::Cluster => "cluster",
                    PlannerArg::Remote => "remote",
                }
                .to_string()
            });
            let (status, report) = run_command(&RunRequest {
                source,
                out_dir: out,
                overrides: sets,
                seed,
                planner,
            })?;
            let s = &report.summary;
            println!(
                "planner {} | {} UAVs | seed {} | mean coverage {:.3} | mean completion {}",
                s.planner,
                s.uav_count,
                s.seed,
                s.mean_coverage_rate,
                s.mean_completion_time_s
                    .map_or("n/a".to_string(), |t| format!("{:.1} min", t / 60.0))
            );
            Ok(status.exit_code() as u8)
        }
        Command::Sweep {
            scenario,
            fleets,
            seeds,
            out,
            sets,
        } => {
            let fleets: Vec<usize> = parse_list(&fleets)?;
            let seeds = parse_seeds(&seeds)?;
            let table = sweep_command(&scenario, &sets, &fleets, &seeds, &out)?;
            print!("{}", table.to_csv());
            for r in table.runs.iter().filter(|r| r.error.is_some()) {
                eprintln!("fleet {} seed {}: {}", r.fleet, r.seed, r.error.as_deref().unwrap_or(""));
            }
            Ok(0)
        }
        Command::Render {
            frames,
            svg,
            at,
            update_index,
        } => {
            render_file(&frames, &svg, &RenderOptions { update_index, at_s: at })?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
