//! Operations behind the command-line tool: run, sweep and render.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{load_config, parse_override, ConfigError, ResolvedConfig};
use crate::render::RenderError;
use crate::sim::{run_with_sink, MetricsReport, RunError};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.jsonl";
pub const FRAMES_FILE: &str = "frames.jsonl";

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("{0}")]
    Usage(String),
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CommandError {
    CommandError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// Writes through a sibling temporary file so readers never see a partial
/// file.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CommandError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Creates `dir` if needed; its parent must already exist.
fn prepare_out_dir(dir: &Path) -> Result<(), CommandError> {
    if dir.is_dir() {
        return Ok(());
    }
    let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(io_err(dir, "parent directory does not exist"));
    }
    fs::create_dir(dir).map_err(|e| io_err(dir, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestOutputs {
    pub manifest: PathBuf,
    pub metrics: PathBuf,
    pub frames: PathBuf,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    pub started_unix_s: u64,
    pub config: serde_json::Value,
    pub outputs: ManifestOutputs,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CommandError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        serde_json::from_str(&text).map_err(|e| io_err(path, e))
    }
}

/// Where a run's configuration comes from.
#[derive(Debug, Clone)]
pub enum ConfigSource {
    Scenario(PathBuf),
    Manifest(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub source: ConfigSource,
    pub out_dir: PathBuf,
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
    pub planner: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Complete,
    Incomplete,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Complete => 0,
            RunStatus::Incomplete => 2,
        }
    }
}

fn resolve(
    source: &ConfigSource,
    overrides: &[String],
    seed: Option<u64>,
    planner: Option<&str>,
) -> Result<ResolvedConfig, CommandError> {
    let mut resolved = match source {
        ConfigSource::Scenario(path) => load_config(path, overrides)?,
        ConfigSource::Manifest(path) => {
            let mut r = ResolvedConfig::from_json(&RunManifest::load(path)?.config)?;
            for o in overrides {
                let (k, v) = parse_override(o).map_err(|issue| ConfigError { issues: vec![issue] })?;
                r = r.with(&k, v)?;
            }
            r
        }
    };
    if let Some(seed) = seed {
        resolved = resolved.with("mission.seed", toml::Value::Integer(seed as i64))?;
    }
    if let Some(planner) = planner {
        resolved = resolved.with("planner.kind", toml::Value::String(planner.to_string()))?;
    }
    Ok(resolved)
}

/// Writes the manifest, runs the scenario and writes metrics and frames.
pub fn run_command(req: &RunRequest) -> Result<(RunStatus, MetricsReport), CommandError> {
    let resolved = resolve(&req.source, &req.overrides, req.seed, req.planner.as_deref())?;
    let scenario = resolved.to_scenario()?;
    prepare_out_dir(&req.out_dir)?;

    let outputs = ManifestOutputs {
        manifest: req.out_dir.join(MANIFEST_FILE),
        metrics: req.out_dir.join(METRICS_FILE),
        frames: req.out_dir.join(FRAMES_FILE),
    };
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: scenario.seed,
        started_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        config: resolved.to_json(),
        outputs: outputs.clone(),
    };
    let body = serde_json::to_string_pretty(&manifest).expect("manifest is serializable");
    write_atomic(&outputs.manifest, body.as_bytes())?;

    let frames_tmp = outputs.frames.with_extension("tmp");
    let file = File::create(&frames_tmp).map_err(|e| io_err(&frames_tmp, e))?;
    let mut writer = BufWriter::new(file);
    let mut write_failure = None;
    let report = run_with_sink(&scenario, &mut |rec| {
        if write_failure.is_none() {
            if let Err(e) = writeln!(writer, "{}", rec.to_line()) {
                write_failure = Some(e);
            }
        }
    })?;
    if let Some(e) = write_failure {
        return Err(io_err(&frames_tmp, e));
    }
    writer.flush().map_err(|e| io_err(&frames_tmp, e))?;
    drop(writer);
    fs::rename(&frames_tmp, &outputs.frames).map_err(|e| io_err(&outputs.frames, e))?;
    write_atomic(&outputs.metrics, report.to_jsonl().as_bytes())?;

    let status = if report.is_complete() {
        RunStatus::Complete
    } else {
        RunStatus::Incomplete
    };
    Ok((status, report))
}

/// Parses `1..5` (inclusive) or `1,2,7`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, CommandError> {
    let bad = || CommandError::Usage(format!("invalid seed list {text:?}"));
    if let Some((a, b)) = text.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    parse_list(text).map_err(|_| bad())
}

pub fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, CommandError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CommandError::Usage(format!("invalid list entry {s:?}"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRun {
    pub fleet: usize,
    pub seed: u64,
    pub mean_coverage_rate: Option<f64>,
    pub mean_completion_time_s: Option<f64>,
    pub all_complete: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetRow {
    pub fleet: usize,
    pub runs: usize,
    pub failures: usize,
    pub mean_coverage_rate: Option<f64>,
    pub mean_completion_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<FleetRow>,
    pub runs: Vec<SweepRun>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_default()
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("fleet,runs,failures,mean_coverage_rate,mean_completion_time_s\n");
        for r in &self.rows {
            s += &format!(
                "{},{},{},{},{}\n",
                r.fleet,
                r.runs,
                r.failures,
                cell(r.mean_coverage_rate),
                cell(r.mean_completion_time_s)
            );
        }
        s
    }

    pub fn runs_csv(&self) -> String {
        let mut s = String::from("fleet,seed,mean_coverage_rate,mean_completion_time_s,all_complete,error\n");
        for r in &self.runs {
            let err = r.error.as_deref().unwrap_or("").replace(['"', '\n'], " ");
            s += &format!(
                "{},{},{},{},{},\"{}\"\n",
                r.fleet,
                r.seed,
                cell(r.mean_coverage_rate),
                cell(r.mean_completion_time_s),
                r.all_complete,
                err
            );
        }
        s
    }
}

/// One run per (fleet, seed) pair, in parallel. Failed runs are recorded
/// and excluded from the fleet means.
pub fn sweep_command(
    scenario: &Path,
    overrides: &[String],
    fleets: &[usize],
    seeds: &[u64],
    out_dir: &Path,
) -> Result<SweepTable, CommandError> {
    if fleets.is_empty() {
        return Err(CommandError::Usage("at least one fleet size is required".into()));
    }
    if seeds.is_empty() {
        return Err(CommandError::Usage("at least one seed is required".into()));
    }
    let base = load_config(scenario, overrides)?;
    prepare_out_dir(out_dir)?;
    let runs_dir = out_dir.join("runs");
    prepare_out_dir(&runs_dir)?;

    let pairs: Vec<(usize, u64)> = fleets.iter().flat_map(|&f| seeds.iter().map(move |&s| (f, s))).collect();
    let runs: Vec<SweepRun> = pairs
        .par_iter()
        .map(|&(fleet, seed)| {
            let outcome = (|| -> Result<MetricsReport, CommandError> {
                let cfg = base
                    .with("uav.count", toml::Value::Integer(fleet as i64))?
                    .with("mission.seed", toml::Value::Integer(seed as i64))?
                    .to_scenario()?;
                let report = run_with_sink(&cfg, &mut |_| {})?;
                let path = runs_dir.join(format!("fleet{fleet}_seed{seed}.jsonl"));
                write_atomic(&path, report.to_jsonl().as_bytes())?;
                Ok(report)
            })();
            match outcome {
                Ok(r) => SweepRun {
                    fleet,
                    seed,
                    mean_coverage_rate: Some(r.summary.mean_coverage_rate),
                    mean_completion_time_s: r.summary.mean_completion_time_s,
                    all_complete: r.summary.all_complete,
                    error: None,
                },
                Err(e) => SweepRun {
                    fleet,
                    seed,
                    mean_coverage_rate: None,
                    mean_completion_time_s: None,
                    all_complete: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut rows = Vec::new();
    for &fleet in fleets {
        let mine: Vec<&SweepRun> = runs.iter().filter(|r| r.fleet == fleet).collect();
        rows.push(FleetRow {
            fleet,
            runs: mine.len(),
            failures: mine.iter().filter(|r| r.error.is_some()).count(),
            mean_coverage_rate: mean(mine.iter().filter_map(|r| r.mean_coverage_rate)),
            mean_completion_time_s: mean(mine.iter().filter_map(|r| r.mean_completion_time_s)),
        });
    }
    let table = SweepTable { rows, runs };
    write_atomic(&out_dir.join("summary.csv"), table.to_csv().as_bytes())?;
    write_atomic(&out_dir.join("runs.csv"), table.runs_csv().as_bytes())?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seeds("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_seeds("3,9").unwrap(), vec![3, 9]);
        assert!(parse_seeds("5..1").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn missing_parent_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(prepare_out_dir(&dir.path().join("a/b")).is_err());
        assert!(prepare_out_dir(&dir.path().join("a")).is_ok());
    }
}
