//! Time-stepped mission simulation.
//!
//! Two evaluation modes are supported. In snapshot mode every boundary
//! update index is evaluated as an independent mission flown from the launch
//! position over that index's survey set. In dynamic mode a single mission
//! runs continuously and the fire boundary is refreshed every
//! `update_interval_s`, triggering a re-plan of the unvisited points with
//! live UAV positions and energy.

pub mod energy;
pub mod metrics;
pub mod world;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::GreedyParams;
use crate::fire_world::{
    generate_survey_points, outline_segments, FireMask, FireScenario, FireSpreadParams, Neighborhood, PointId,
    SurveyPoint, SurveySet, SyntheticFire, DEFAULT_CELL_SIZE_M,
};
use crate::geometry::Point;
use crate::planner::{
    build_mission_prompt, build_route_prompt, plan_route_with_validation, plan_with_validation, AttemptOutcome,
    PlannerKind, PlanningError, RoutePlannerKind, UavDescriptor, DEFAULT_MAX_RETRIES, DEFAULT_MISSION_COMMAND,
};
use crate::routing::DEFAULT_MAX_PASSES;

pub use energy::{battery_energy_j, PowerModel};
pub use metrics::{
    Frame, MetricsRecord, MetricsReport, PlanRecord, PlanningSummary, PointRecord, RouteRecord, RunSummary,
    StreamRecord, UavFrame, UavMetrics, UpdateMetrics,
};
pub use world::{
    advance_uav, coverage_rate, detect_survivors, Detection, Kinematics, SimError, UavEvent, UavState, UavStatus,
    World,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Snapshot,
    Dynamic,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Snapshot => "snapshot",
            Mode::Dynamic => "dynamic",
        }
    }
}

/// A configuration value that violates its constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid scenario: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Config(Vec<ConfigIssue>),
    #[error("planning failed at update index {update_index}, t = {t_s} s: {source}")]
    Planning {
        update_index: usize,
        t_s: f64,
        #[source]
        source: PlanningError,
    },
    #[error("update index {0} has no burning cells")]
    EmptySurvey(usize),
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub uav_count: usize,
    pub launch_position: Point,
    pub cruise_speed_mps: f64,
    pub cell_size_m: f64,
    pub detection_range_m: f64,
    pub battery_capacity_mah: f64,
    pub battery_voltage_v: f64,
    pub power: PowerModel,
    pub update_interval_s: f64,
    pub dwell_time_s: f64,
    /// Onboard route-planning inference time per planning episode.
    pub inference_latency_s: f64,
    pub dt_s: f64,
    pub frame_interval_s: f64,
    /// Hard stop for a single mission segment.
    pub max_mission_time_s: f64,
    pub planner: PlannerKind,
    pub route_planner: RoutePlannerKind,
    pub greedy: GreedyParams,
    pub max_retries: usize,
    pub max_passes: usize,
    pub mission_command: String,
    pub seed: u64,
    pub mode: Mode,
    pub survivors: Vec<Point>,
    pub fire: FireScenario,
}

impl ScenarioConfig {
    /// Default constants with the given fleet size and fire scenario.
    pub fn new(uav_count: usize, launch_position: Point, fire: FireScenario) -> Self {
        Self {
            uav_count,
            launch_position,
            cruise_speed_mps: 15.0,
            cell_size_m: DEFAULT_CELL_SIZE_M,
            detection_range_m: 1500.0,
            battery_capacity_mah: 9600.0,
            battery_voltage_v: 14.8,
            power: PowerModel::default(),
            update_interval_s: 300.0,
            dwell_time_s: 0.0,
            inference_latency_s: 0.0,
            dt_s: 1.0,
            frame_interval_s: 5.0,
            max_mission_time_s: 86_400.0,
            planner: PlannerKind::Cluster,
            route_planner: RoutePlannerKind::default(),
            greedy: GreedyParams::default(),
            max_retries: DEFAULT_MAX_RETRIES,
            max_passes: DEFAULT_MAX_PASSES,
            mission_command: DEFAULT_MISSION_COMMAND.to_string(),
            seed: 0,
            mode: Mode::Snapshot,
            survivors: Vec::new(),
            fire,
        }
    }

    /// The synthetic ~300-cell scenario used for fleet and planner
    /// comparisons.
    pub fn eaton(uav_count: usize, seed: u64) -> Self {
        let synthetic = SyntheticFire::eaton_scale();
        let launch = default_launch(&synthetic);
        let mut c = Self::new(uav_count, launch, eaton_fire(&synthetic, seed));
        c.seed = seed;
        c
    }

    pub fn battery_energy_j(&self) -> f64 {
        battery_energy_j(self.battery_capacity_mah, self.battery_voltage_v)
    }

    pub fn kinematics(&self) -> Kinematics {
        Kinematics {
            cruise_speed_mps: self.cruise_speed_mps,
            power: self.power,
            dwell_time_s: self.dwell_time_s,
            detection_range_m: self.detection_range_m,
        }
    }

    /// Every violated invariant, keyed by configuration name.
    pub fn validate(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let mut positive = |key: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                issues.push(ConfigIssue::new(key, format!("must be > 0, got {v}")));
            }
        };
        positive("uav.speed_mps", self.cruise_speed_mps);
        positive("mission.cell_size_m", self.cell_size_m);
        positive("uav.detection_range_m", self.detection_range_m);
        positive("uav.battery_mah", self.battery_capacity_mah);
        positive("uav.battery_voltage_v", self.battery_voltage_v);
        positive("power.base_w", self.power.base_w);
        positive("power.flight_per_mps_w", self.power.flight_per_mps_w);
        positive("power.llm_idle_w", self.power.llm_idle_w);
        positive("power.llm_infer_w", self.power.llm_infer_w);
        positive("mission.update_interval_s", self.update_interval_s);
        positive("mission.dt_s", self.dt_s);
        positive("output.frame_interval_s", self.frame_interval_s);
        positive("mission.max_time_s", self.max_mission_time_s);
        let mut non_negative = |key: &str, v: f64| {
            if !(v >= 0.0 && v.is_finite()) {
                issues.push(ConfigIssue::new(key, format!("must be >= 0, got {v}")));
            }
        };
        non_negative("mission.dwell_s", self.dwell_time_s);
        non_negative("mission.inference_latency_s", self.inference_latency_s);
        non_negative("greedy.lambda", self.greedy.lambda);
        non_negative("greedy.b", self.greedy.penalty_coefficient);
        if self.uav_count < 1 {
            issues.push(ConfigIssue::new("uav.count", "must be at least 1"));
        }
        let p = self.fire.spread.ignition_probability;
        if !(0.0..=1.0).contains(&p) {
            issues.push(ConfigIssue::new("fire.spread_probability", format!("must be in [0, 1], got {p}")));
        }
        if self.fire.spread.steps_per_update < 1 {
            issues.push(ConfigIssue::new("fire.steps_per_update", "must be at least 1"));
        }
        if self.fire.updates < 1 {
            issues.push(ConfigIssue::new("fire.updates", "must be at least 1"));
        }
        if self.fire.initial.burning_count() == 0 {
            issues.push(ConfigIssue::new("fire", "initial mask has no burning cells"));
        }
        issues
    }
}

/// Fire spread between boundary updates of the synthetic scenario.
pub fn eaton_spread() -> FireSpreadParams {
    FireSpreadParams {
        ignition_probability: 0.1,
        neighborhood: Neighborhood::Eight,
        steps_per_update: 2,
    }
}

pub const EATON_UPDATES: usize = 5;

pub fn eaton_fire(synthetic: &SyntheticFire, seed: u64) -> FireScenario {
    FireScenario {
        initial: synthetic.initial_mask(seed),
        spread: eaton_spread(),
        updates: EATON_UPDATES,
    }
}

/// Ground station just outside the southern edge of the synthetic fire.
pub fn default_launch(synthetic: &SyntheticFire) -> Point {
    Point::new(synthetic.center.x, synthetic.center.y - synthetic.radius_m - 600.0)
}

/// Collected result of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: MetricsReport,
    pub stream: Vec<StreamRecord>,
}

/// Runs the scenario, collecting the frame stream in memory.
pub fn run(config: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let mut stream = Vec::new();
    let metrics = run_with_sink(config, &mut |r| stream.push(r.clone()))?;
    Ok(RunOutput { metrics, stream })
}

/// Runs the scenario, handing each frame or plan record to `sink` as it is
/// produced.
pub fn run_with_sink(config: &ScenarioConfig, sink: &mut dyn FnMut(&StreamRecord)) -> Result<MetricsReport, RunError> {
    let issues = config.validate();
    if !issues.is_empty() {
        return Err(RunError::Config(issues));
    }
    let masks = config.fire.masks(config.seed);
    let mut updates = Vec::with_capacity(masks.len());
    let mut detections = Vec::new();

    match config.mode {
        Mode::Snapshot => {
            for (t, mask) in masks.iter().enumerate() {
                let mut mission = Mission::launch(config, mask, t, sink)?;
                mission.plan()?;
                mission.run_until(None);
                updates.push(mission.record());
                detections.extend(mission.world.detections.iter().cloned());
            }
        }
        Mode::Dynamic => {
            let mut mission = Mission::launch(config, &masks[0], 0, sink)?;
            mission.plan()?;
            for t in 0..masks.len() {
                if t > 0 {
                    mission.on_boundary_update(&masks[t])?;
                }
                let end = (t + 1 < masks.len()).then(|| (t + 1) as f64 * config.update_interval_s);
                mission.run_until(end);
                updates.push(mission.record());
            }
            detections = mission.world.detections.clone();
        }
    }

    let summary = summarize(config, &updates, detections);
    Ok(MetricsReport { updates, summary })
}

fn summarize(config: &ScenarioConfig, updates: &[UpdateMetrics], detections: Vec<Detection>) -> RunSummary {
    let n = updates.len().max(1) as f64;
    let times: Vec<f64> = updates.iter().filter_map(|u| u.mission_completion_time_s).collect();
    let planning = updates.iter().flat_map(|u| &u.planning);
    RunSummary {
        mode: config.mode.as_str().to_string(),
        planner: config.planner.name(),
        uav_count: config.uav_count,
        seed: config.seed,
        update_count: updates.len(),
        mean_coverage_rate: updates.iter().map(|u| u.coverage_rate).sum::<f64>() / n,
        min_coverage_rate: updates.iter().map(|u| u.coverage_rate).fold(1.0, f64::min),
        all_complete: match config.mode {
            Mode::Snapshot => updates.iter().all(|u| u.completed),
            Mode::Dynamic => updates.last().is_some_and(|u| u.completed),
        },
        mean_completion_time_s: (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64),
        max_completion_time_s: times.iter().copied().reduce(f64::max),
        planning_attempts: planning.clone().map(|p| p.attempts).sum(),
        fallback_count: planning.clone().filter(|p| p.fallback_used).count(),
        route_fallback_count: planning.map(|p| p.route_fallbacks).sum(),
        survivors_total: config.survivors.len(),
        detections,
    }
}

/// One mission in flight: the world plus the planners that drive it.
pub struct Mission<'a> {
    config: &'a ScenarioConfig,
    pub world: World,
    mask: FireMask,
    fallback: PlannerKind,
    planning: Vec<PlanningSummary>,
    next_frame_s: f64,
    last_frame_s: Option<f64>,
    sink: &'a mut dyn FnMut(&StreamRecord),
}

impl<'a> Mission<'a> {
    /// Places every UAV at the launch position with a full battery.
    pub fn launch(
        config: &'a ScenarioConfig,
        mask: &FireMask,
        update_index: usize,
        sink: &'a mut dyn FnMut(&StreamRecord),
    ) -> Result<Self, RunError> {
        let survey = survey_for(mask, config.cell_size_m, update_index)?;
        let capacity = config.battery_energy_j();
        let uavs = (0..config.uav_count)
            .map(|i| UavState::new(i, config.launch_position, capacity))
            .collect();
        Ok(Self {
            config,
            world: World::new(survey, uavs, config.kinematics(), config.survivors.clone()),
            mask: mask.clone(),
            fallback: PlannerKind::Greedy(config.greedy),
            planning: Vec::new(),
            next_frame_s: 0.0,
            last_frame_s: None,
            sink,
        })
    }

    /// Assigns every unvisited point of the current survey set to the
    /// non-depleted UAVs and re-routes them from where they are.
    pub fn plan(&mut self) -> Result<(), RunError> {
        let cfg = self.config;
        let t_s = self.world.time_s;
        let update_index = self.world.update_index;
        let in_progress: BTreeSet<PointId> = self.world.uavs.iter().filter_map(UavState::dwelling_on).collect();
        let pending: BTreeSet<PointId> = self
            .world
            .survey
            .ids()
            .into_iter()
            .filter(|id| !self.world.visited_at.contains_key(id) && !in_progress.contains(id))
            .collect();
        let targets = self.world.survey.restricted_to(&pending);
        let active: Vec<usize> = self.world.uavs.iter().filter(|u| !u.is_depleted()).map(|u| u.index).collect();

        let mut summary = PlanningSummary {
            planner: cfg.planner.name(),
            attempts: 0,
            fallback_used: false,
            outcomes: Vec::new(),
            route_attempts: 0,
            route_fallbacks: 0,
        };
        let mut lists: Vec<Vec<PointId>> = vec![Vec::new(); active.len()];
        if !active.is_empty() && !targets.is_empty() {
            let descriptors = active
                .iter()
                .map(|&i| UavDescriptor {
                    id: i,
                    position: self.world.uavs[i].position,
                    energy_fraction: self.world.uavs[i].energy_fraction(),
                })
                .collect();
            let prompt = build_mission_prompt(&cfg.mission_command, descriptors, &targets);
            let episode = plan_with_validation(&cfg.planner, prompt, &targets, cfg.max_retries, &self.fallback)
                .map_err(|source| RunError::Planning {
                    update_index,
                    t_s,
                    source,
                })?;
            summary.attempts = episode.attempts;
            summary.fallback_used = episode.fallback_used;
            summary.outcomes = episode
                .outcomes
                .iter()
                .map(|o| match o {
                    AttemptOutcome::Verdict(v) => format!("{:?}", v.kind()),
                    AttemptOutcome::ParseFailure(_) => "ParseFailure".to_string(),
                })
                .collect();
            lists = episode.final_assignment.lists().to_vec();
        }

        let mut routes = Vec::new();
        for (k, &u) in active.iter().enumerate() {
            let assigned: Vec<SurveyPoint> = lists[k].iter().filter_map(|id| targets.get(*id).copied()).collect();
            let uav = &self.world.uavs[u];
            let start = uav.position;
            let route = if assigned.is_empty() {
                crate::routing::Route::new(u, start, Vec::new())
            } else {
                let state = format!(
                    "uav_{u} at ({:.1}, {:.1}) m, energy {:.1}%",
                    start.x,
                    start.y,
                    uav.energy_fraction() * 100.0
                );
                let prompt = build_route_prompt(&assigned, &state);
                let ep = plan_route_with_validation(&cfg.route_planner, prompt, u, start, cfg.max_retries, cfg.max_passes)
                    .map_err(|source| RunError::Planning {
                        update_index,
                        t_s,
                        source,
                    })?;
                summary.route_attempts += ep.attempts;
                summary.route_fallbacks += usize::from(ep.fallback_used);
                ep.route
            };
            routes.push(RouteRecord {
                uav: u,
                start_x_m: start.x,
                start_y_m: start.y,
                waypoints: route.waypoints.clone(),
            });
            self.world.uavs[u].assign_route(route, cfg.inference_latency_s);
        }
        self.planning.push(summary);

        let record = PlanRecord {
            t_s,
            update_index,
            launch_x_m: cfg.launch_position.x,
            launch_y_m: cfg.launch_position.y,
            cell_size_m: cfg.cell_size_m,
            survey: self
                .world
                .survey
                .points
                .iter()
                .map(|p| PointRecord {
                    id: p.id,
                    x_m: p.position.x,
                    y_m: p.position.y,
                })
                .collect(),
            assignment: crate::assignment::Assignment::from_lists(lists),
            assignment_uavs: active,
            routes,
            fire_outline: outline_segments(&self.mask),
        };
        (self.sink)(&StreamRecord::Plan(record));
        self.emit_frame();
        Ok(())
    }

    /// Swaps in a refreshed fire mask and re-plans the remaining work.
    pub fn on_boundary_update(&mut self, new_mask: &FireMask) -> Result<(), RunError> {
        let update_index = self.world.update_index + 1;
        let survey = survey_for(new_mask, self.config.cell_size_m, update_index)?;
        for p in &survey.points {
            self.world.positions.insert(p.id, p.position);
        }
        self.world.survey = survey;
        self.world.update_index = update_index;
        self.mask = new_mask.clone();
        self.plan()
    }

    /// Steps until `end_s` (exclusive of idle early exit) or, when `end_s`
    /// is `None`, until every UAV is done or depleted.
    pub fn run_until(&mut self, end_s: Option<f64>) {
        let cap = self.config.max_mission_time_s;
        loop {
            let now = self.world.time_s;
            match end_s {
                Some(end) if now >= end - 1e-9 => break,
                None if self.world.all_done() => break,
                _ => {}
            }
            if now >= cap {
                break;
            }
            let mut dt = self.config.dt_s;
            if let Some(end) = end_s {
                dt = dt.min(end - now);
            }
            self.world.step(dt);
            if self.world.time_s >= self.next_frame_s - 1e-9 {
                self.emit_frame();
            }
        }
        if end_s.is_none() && self.last_frame_s != Some(self.world.time_s) {
            self.emit_frame();
        }
    }

    fn emit_frame(&mut self) {
        let w = &self.world;
        let frame = Frame {
            t_s: w.time_s,
            update_index: w.update_index,
            uavs: w
                .uavs
                .iter()
                .map(|u| UavFrame {
                    index: u.index,
                    x_m: u.position.x,
                    y_m: u.position.y,
                    energy_j: u.remaining_energy_j,
                    status: u.status,
                })
                .collect(),
            visited_count: w.visited_count(),
            survey_total: w.survey.len(),
        };
        self.last_frame_s = Some(w.time_s);
        while self.next_frame_s <= w.time_s + 1e-9 {
            self.next_frame_s += self.config.frame_interval_s;
        }
        (self.sink)(&StreamRecord::Frame(frame));
    }

    /// Metrics for the current update index.
    pub fn record(&mut self) -> UpdateMetrics {
        let w = &self.world;
        let visited_count = w.visited_count();
        let total = w.survey.len();
        let completed = visited_count == total;
        let completion = completed.then(|| {
            w.survey
                .points
                .iter()
                .filter_map(|p| w.visited_at.get(&p.id).copied())
                .fold(0.0, f64::max)
        });
        UpdateMetrics {
            update_index: w.update_index,
            survey_total: total,
            visited_count,
            coverage_rate: w.coverage_rate().unwrap_or(0.0),
            completed,
            mission_completion_time_s: completion,
            elapsed_s: w.time_s,
            uavs: w
                .uavs
                .iter()
                .map(|u| UavMetrics {
                    index: u.index,
                    points_visited: u.visited.len(),
                    distance_m: u.distance_m,
                    energy_consumed_j: u.consumed_j,
                    remaining_energy_j: u.remaining_energy_j,
                    depleted: u.is_depleted(),
                })
                .collect(),
            planning: std::mem::take(&mut self.planning),
        }
    }
}

fn survey_for(mask: &FireMask, cell_size_m: f64, update_index: usize) -> Result<SurveySet, RunError> {
    let mut survey = generate_survey_points(mask, cell_size_m);
    if survey.is_empty() {
        return Err(RunError::EmptySurvey(update_index));
    }
    survey.update_index = update_index;
    Ok(survey)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fire_world::Cell;

    /// Three cells stacked north of the origin with centroids at
    /// (0, 450), (0, 900), (0, 1350).
    fn column_scenario() -> ScenarioConfig {
        let mut mask = FireMask::new(1, 3, 450.0, Point::new(-225.0, 225.0)).unwrap();
        for r in 0..3 {
            mask.set(Cell::new(0, r), true);
        }
        let fire = FireScenario {
            initial: mask,
            spread: FireSpreadParams {
                ignition_probability: 0.0,
                ..FireSpreadParams::default()
            },
            updates: 1,
        };
        ScenarioConfig::new(1, Point::default(), fire)
    }

    #[test]
    fn single_uav_column_takes_ninety_seconds() {
        let out = run(&column_scenario()).unwrap();
        let u = &out.metrics.updates[0];
        assert_eq!(u.coverage_rate, 1.0);
        assert_eq!(u.mission_completion_time_s, Some(90.0));
        assert!((u.uavs[0].energy_consumed_j - 170.0 * 90.0).abs() < 1e-6);
    }

    #[test]
    fn sixty_seconds_of_battery_reaches_two_points() {
        let mut c = column_scenario();
        c.battery_voltage_v = 1.0;
        c.battery_capacity_mah = 170.0 * 60.0 / 3.6;
        let out = run(&c).unwrap();
        let u = &out.metrics.updates[0];
        assert!((u.coverage_rate - 2.0 / 3.0).abs() < 1e-12, "{}", u.coverage_rate);
        assert!(u.uavs[0].depleted);
        assert!(!out.metrics.summary.all_complete);
    }

    #[test]
    fn invalid_config_lists_fields() {
        let mut c = column_scenario();
        c.cruise_speed_mps = -3.0;
        c.dt_s = 0.0;
        let keys: Vec<_> = c.validate().into_iter().map(|i| i.key).collect();
        assert_eq!(keys, vec!["uav.speed_mps", "mission.dt_s"]);
    }
}
