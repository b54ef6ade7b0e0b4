//! Records written to the metrics file and the frame stream.

use serde::{Deserialize, Serialize};

use super::world::{Detection, UavStatus};
use crate::assignment::Assignment;
use crate::fire_world::PointId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavMetrics {
    pub index: usize,
    pub points_visited: usize,
    pub distance_m: f64,
    pub energy_consumed_j: f64,
    pub remaining_energy_j: f64,
    pub depleted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningSummary {
    pub planner: String,
    pub attempts: usize,
    pub fallback_used: bool,
    /// One entry per attempt: verdict kind or `ParseFailure`.
    pub outcomes: Vec<String>,
    pub route_attempts: usize,
    pub route_fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateMetrics {
    pub update_index: usize,
    pub survey_total: usize,
    pub visited_count: usize,
    pub coverage_rate: f64,
    pub completed: bool,
    /// Seconds from dispatch until the last point of the set was visited.
    pub mission_completion_time_s: Option<f64>,
    pub elapsed_s: f64,
    pub uavs: Vec<UavMetrics>,
    pub planning: Vec<PlanningSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: String,
    pub planner: String,
    pub uav_count: usize,
    pub seed: u64,
    pub update_count: usize,
    pub mean_coverage_rate: f64,
    pub min_coverage_rate: f64,
    /// Every index completed in snapshot mode; the final index in dynamic mode.
    pub all_complete: bool,
    /// Mean over update indices that completed.
    pub mean_completion_time_s: Option<f64>,
    pub max_completion_time_s: Option<f64>,
    pub planning_attempts: usize,
    pub fallback_count: usize,
    pub route_fallback_count: usize,
    pub survivors_total: usize,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub updates: Vec<UpdateMetrics>,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum MetricsRecord {
    Update(UpdateMetrics),
    Summary(RunSummary),
}

impl MetricsReport {
    /// Line-delimited JSON: one `update` record per update index, then the
    /// `summary` trailer.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for u in &self.updates {
            out.push_str(&serde_json::to_string(&MetricsRecord::Update(u.clone())).expect("serializable"));
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&MetricsRecord::Summary(self.summary.clone())).expect("serializable"));
        out.push('\n');
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, String> {
        let mut updates = Vec::new();
        let mut summary = None;
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            match serde_json::from_str::<MetricsRecord>(line).map_err(|e| format!("line {}: {e}", n + 1))? {
                MetricsRecord::Update(u) => updates.push(u),
                MetricsRecord::Summary(s) => summary = Some(s),
            }
        }
        Ok(Self {
            updates,
            summary: summary.ok_or("metrics file has no summary record")?,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.summary.all_complete
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavFrame {
    pub index: usize,
    pub x_m: f64,
    pub y_m: f64,
    pub energy_j: f64,
    pub status: UavStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t_s: f64,
    pub update_index: usize,
    pub uavs: Vec<UavFrame>,
    pub visited_count: usize,
    pub survey_total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub id: PointId,
    pub x_m: f64,
    pub y_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRecord {
    pub uav: usize,
    pub start_x_m: f64,
    pub start_y_m: f64,
    pub waypoints: Vec<PointId>,
}

/// Snapshot of a (re)plan: survey set, assignment and routes, with the fire
/// outline as `[x1, y1, x2, y2]` segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub t_s: f64,
    pub update_index: usize,
    pub launch_x_m: f64,
    pub launch_y_m: f64,
    pub cell_size_m: f64,
    pub survey: Vec<PointRecord>,
    pub assignment: Assignment,
    /// UAV index owning each assignment list.
    pub assignment_uavs: Vec<usize>,
    pub routes: Vec<RouteRecord>,
    pub fire_outline: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum StreamRecord {
    Frame(Frame),
    Plan(PlanRecord),
}

impl StreamRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}
