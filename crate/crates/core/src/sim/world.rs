//! UAV kinematics and energy integration.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::energy::PowerModel;
use crate::fire_world::{PointId, PositionMap, SurveySet};
use crate::geometry::Point;
use crate::routing::Route;

/// Arrival snapping tolerance in meters.
const ARRIVAL_EPS_M: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("coverage rate is undefined for an empty survey set")]
    EmptySurvey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UavStatus {
    EnRoute,
    Dwelling,
    Idle,
    Depleted,
}

/// Flight parameters shared by every UAV of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    pub cruise_speed_mps: f64,
    pub power: PowerModel,
    pub dwell_time_s: f64,
    pub detection_range_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UavState {
    pub index: usize,
    pub position: Point,
    pub capacity_j: f64,
    pub remaining_energy_j: f64,
    /// Running sum of power × duration over every phase.
    pub consumed_j: f64,
    pub status: UavStatus,
    pub route: Route,
    /// Index of the next waypoint in `route`.
    pub cursor: usize,
    pub visited: BTreeSet<PointId>,
    pub inference_active: bool,
    pub pending_inference_s: f64,
    pub dwell_remaining_s: f64,
    pub distance_m: f64,
    pub depleted_at_s: Option<f64>,
    leg_from: Point,
    leg_progress_m: f64,
}

impl UavState {
    pub fn new(index: usize, position: Point, capacity_j: f64) -> Self {
        Self::with_energy(index, position, capacity_j, capacity_j)
    }

    pub fn with_energy(index: usize, position: Point, capacity_j: f64, remaining_j: f64) -> Self {
        Self {
            index,
            position,
            capacity_j,
            remaining_energy_j: remaining_j.clamp(0.0, capacity_j),
            consumed_j: 0.0,
            status: if remaining_j > 0.0 { UavStatus::Idle } else { UavStatus::Depleted },
            route: Route::new(index, position, Vec::new()),
            cursor: 0,
            visited: BTreeSet::new(),
            inference_active: false,
            pending_inference_s: 0.0,
            dwell_remaining_s: 0.0,
            distance_m: 0.0,
            depleted_at_s: None,
            leg_from: position,
            leg_progress_m: 0.0,
        }
    }

    pub fn is_depleted(&self) -> bool {
        self.status == UavStatus::Depleted
    }

    /// No pending inference, dwell or waypoint.
    pub fn is_done(&self) -> bool {
        self.is_depleted()
            || (self.pending_inference_s <= 0.0 && self.dwell_remaining_s <= 0.0 && self.cursor >= self.route.waypoints.len())
    }

    /// Waypoint currently being dwelled on, if any.
    pub fn dwelling_on(&self) -> Option<PointId> {
        (self.dwell_remaining_s > 0.0 && self.cursor > 0).then(|| self.route.waypoints[self.cursor - 1])
    }

    /// Replaces the route; flight restarts from the current position.
    pub fn assign_route(&mut self, route: Route, inference_s: f64) {
        let has_work = !route.waypoints.is_empty();
        self.route = route;
        self.cursor = 0;
        self.leg_from = self.position;
        self.leg_progress_m = 0.0;
        if has_work && inference_s > 0.0 {
            self.pending_inference_s = inference_s;
        }
        self.refresh_status();
    }

    pub fn energy_fraction(&self) -> f64 {
        if self.capacity_j > 0.0 {
            self.remaining_energy_j / self.capacity_j
        } else {
            0.0
        }
    }

    fn refresh_status(&mut self) {
        if self.is_depleted() {
            return;
        }
        self.inference_active = self.pending_inference_s > 0.0;
        self.status = if self.dwell_remaining_s > 0.0 {
            UavStatus::Dwelling
        } else if self.pending_inference_s <= 0.0 && self.cursor < self.route.waypoints.len() {
            UavStatus::EnRoute
        } else {
            UavStatus::Idle
        };
    }
}

/// Something that happened to a UAV during a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UavEvent {
    Arrived { uav: usize, point: PointId, at_s: f64, position: Point },
    Visited { uav: usize, point: PointId, at_s: f64 },
    Depleted { uav: usize, at_s: f64 },
}

enum Phase {
    Inference,
    Dwell,
    Travel { target: Point, remaining_m: f64 },
    Idle,
}

/// Advances one UAV by `dt` seconds starting at absolute time `t0`.
/// Phases are integrated exactly: arrivals and depletion happen at their
/// true instants inside the step, and leftover time flows into the next
/// phase.
pub fn advance_uav(uav: &mut UavState, dt: f64, t0: f64, kin: &Kinematics, positions: &PositionMap) -> Vec<UavEvent> {
    let mut events = Vec::new();
    let mut elapsed = 0.0;
    while elapsed < dt && !uav.is_depleted() {
        let budget = dt - elapsed;
        let phase = if uav.pending_inference_s > 0.0 {
            Phase::Inference
        } else if uav.dwell_remaining_s > 0.0 {
            Phase::Dwell
        } else if let Some(id) = uav.route.waypoints.get(uav.cursor) {
            let target = positions[id];
            let leg = uav.leg_from.distance(&target);
            Phase::Travel {
                target,
                remaining_m: (leg - uav.leg_progress_m).max(0.0),
            }
        } else {
            Phase::Idle
        };
        let (speed, inferring, phase_len) = match phase {
            Phase::Inference => (0.0, true, uav.pending_inference_s),
            Phase::Dwell => (0.0, false, uav.dwell_remaining_s),
            Phase::Travel { remaining_m, .. } => {
                let t = if remaining_m <= ARRIVAL_EPS_M {
                    0.0
                } else {
                    remaining_m / kin.cruise_speed_mps
                };
                (kin.cruise_speed_mps, false, t)
            }
            Phase::Idle => (0.0, false, budget),
        };
        uav.inference_active = inferring;
        let power = kin.power.power_draw(speed, inferring);
        let completes = phase_len <= budget;
        let mut dur = phase_len.min(budget);
        let time_to_empty = if power > 0.0 { uav.remaining_energy_j / power } else { f64::INFINITY };
        let runs_dry = time_to_empty < dur;
        if runs_dry {
            dur = time_to_empty;
        }

        match phase {
            Phase::Inference => uav.pending_inference_s = (uav.pending_inference_s - dur).max(0.0),
            Phase::Dwell => {
                uav.dwell_remaining_s = (uav.dwell_remaining_s - dur).max(0.0);
                if !runs_dry && completes {
                    uav.dwell_remaining_s = 0.0;
                    let point = uav.route.waypoints[uav.cursor - 1];
                    uav.visited.insert(point);
                    events.push(UavEvent::Visited {
                        uav: uav.index,
                        point,
                        at_s: t0 + elapsed + dur,
                    });
                }
            }
            Phase::Travel { target, remaining_m } => {
                if !runs_dry && completes {
                    uav.distance_m += remaining_m;
                    uav.position = target;
                    uav.leg_from = target;
                    uav.leg_progress_m = 0.0;
                    let point = uav.route.waypoints[uav.cursor];
                    uav.cursor += 1;
                    let at_s = t0 + elapsed + dur;
                    events.push(UavEvent::Arrived {
                        uav: uav.index,
                        point,
                        at_s,
                        position: target,
                    });
                    if kin.dwell_time_s > 0.0 {
                        uav.dwell_remaining_s = kin.dwell_time_s;
                    } else {
                        uav.visited.insert(point);
                        events.push(UavEvent::Visited {
                            uav: uav.index,
                            point,
                            at_s,
                        });
                    }
                } else {
                    let step = speed * dur;
                    uav.leg_progress_m += step;
                    uav.distance_m += step;
                    let leg = uav.leg_from.distance(&target);
                    uav.position = if leg > 0.0 {
                        let f = (uav.leg_progress_m / leg).min(1.0);
                        Point::new(
                            uav.leg_from.x + (target.x - uav.leg_from.x) * f,
                            uav.leg_from.y + (target.y - uav.leg_from.y) * f,
                        )
                    } else {
                        target
                    };
                }
            }
            Phase::Idle => {}
        }

        let used = if runs_dry { uav.remaining_energy_j } else { power * dur };
        uav.consumed_j += used;
        uav.remaining_energy_j = (uav.remaining_energy_j - used).max(0.0);
        elapsed += dur;
        if runs_dry || uav.remaining_energy_j <= 0.0 {
            uav.remaining_energy_j = 0.0;
            uav.status = UavStatus::Depleted;
            uav.inference_active = false;
            uav.depleted_at_s = Some(t0 + elapsed);
            events.push(UavEvent::Depleted {
                uav: uav.index,
                at_s: t0 + elapsed,
            });
            break;
        }
        if matches!(phase, Phase::Idle) {
            break;
        }
    }
    uav.refresh_status();
    events
}

/// Indices of survivors within `range_m` (inclusive) of `position`.
pub fn detect_survivors(position: Point, survivors: &[Point], range_m: f64) -> Vec<usize> {
    survivors
        .iter()
        .enumerate()
        .filter(|(_, s)| position.distance(s) <= range_m)
        .map(|(i, _)| i)
        .collect()
}

/// `|visited ∩ S(t)| / |S(t)|`
pub fn coverage_rate(visited: &BTreeSet<PointId>, survey: &SurveySet) -> Result<f64, SimError> {
    if survey.is_empty() {
        return Err(SimError::EmptySurvey);
    }
    let hit = survey.points.iter().filter(|p| visited.contains(&p.id)).count();
    Ok(hit as f64 / survey.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub survivor: usize,
    pub uav: usize,
    pub t_s: f64,
    pub update_index: usize,
}

/// Mutable simulation state for one mission.
#[derive(Debug, Clone)]
pub struct World {
    pub time_s: f64,
    pub update_index: usize,
    pub survey: SurveySet,
    /// Positions of every survey point generated so far.
    pub positions: PositionMap,
    pub uavs: Vec<UavState>,
    /// First visit time of each point, seconds since dispatch.
    pub visited_at: BTreeMap<PointId, f64>,
    pub survivors: Vec<Point>,
    pub detections: Vec<Detection>,
    pub kinematics: Kinematics,
}

impl World {
    pub fn new(survey: SurveySet, uavs: Vec<UavState>, kinematics: Kinematics, survivors: Vec<Point>) -> Self {
        Self {
            time_s: 0.0,
            update_index: survey.update_index,
            positions: survey.positions(),
            survey,
            uavs,
            visited_at: BTreeMap::new(),
            survivors,
            detections: Vec::new(),
            kinematics,
        }
    }

    pub fn visited(&self) -> BTreeSet<PointId> {
        self.visited_at.keys().copied().collect()
    }

    pub fn all_done(&self) -> bool {
        self.uavs.iter().all(UavState::is_done)
    }

    /// Points of the current survey set that have been visited.
    pub fn visited_count(&self) -> usize {
        self.survey.points.iter().filter(|p| self.visited_at.contains_key(&p.id)).count()
    }

    pub fn coverage_rate(&self) -> Result<f64, SimError> {
        coverage_rate(&self.visited(), &self.survey)
    }

    /// Advances every UAV by `dt` seconds in ascending index order.
    pub fn step(&mut self, dt: f64) -> Vec<UavEvent> {
        let t0 = self.time_s;
        let mut all = Vec::new();
        for uav in &mut self.uavs {
            let events = advance_uav(uav, dt, t0, &self.kinematics, &self.positions);
            all.extend(events);
        }
        for e in &all {
            match *e {
                UavEvent::Visited { point, at_s, .. } => {
                    self.visited_at.entry(point).or_insert(at_s);
                }
                UavEvent::Arrived { uav, position, at_s, .. } => {
                    for s in detect_survivors(position, &self.survivors, self.kinematics.detection_range_m) {
                        if self.detections.iter().all(|d| d.survivor != s) {
                            self.detections.push(Detection {
                                survivor: s,
                                uav,
                                t_s: at_s,
                                update_index: self.update_index,
                            });
                        }
                    }
                }
                UavEvent::Depleted { .. } => {}
            }
        }
        self.time_s = t0 + dt;
        all
    }
}
