use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::fire_world::{PointId, SurveyPoint, SurveySet};
use crate::geometry::Point;

pub const DEFAULT_MISSION_COMMAND: &str =
    "Survey every grid cell inside the wildfire boundary to locate survivors as quickly as possible.";

pub const MISSION_SYSTEM_MESSAGE: &str = "You are the mission planner at an edge ground station coordinating a UAV swarm \
for wildfire search and rescue. You assign survey points to UAVs.";

pub const ROUTE_SYSTEM_MESSAGE: &str =
    "You are the onboard route planner of a search-and-rescue UAV. You order survey points into a flight route.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavDescriptor {
    pub id: usize,
    pub position: Point,
    /// Remaining energy as a fraction of capacity, in [0, 1].
    pub energy_fraction: f64,
}

/// Prompts accept correction blocks appended after failed validations.
pub trait CorrectablePrompt {
    fn append_correction(&mut self, text: String);
    fn corrections(&self) -> &[String];
    fn render(&self) -> String;
}

/// Mission command, UAV descriptors and survey points for the mission
/// planner, plus the corrections accumulated during one planning episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionPrompt {
    pub mission_command: String,
    pub uavs: Vec<UavDescriptor>,
    pub survey_points: Vec<(PointId, Point)>,
    pub correction_history: Vec<String>,
}

pub fn build_mission_prompt(command: &str, uavs: Vec<UavDescriptor>, survey: &SurveySet) -> MissionPrompt {
    MissionPrompt {
        mission_command: command.to_string(),
        uavs,
        survey_points: survey.points.iter().map(|p| (p.id, p.position)).collect(),
        correction_history: Vec::new(),
    }
}

impl MissionPrompt {
    pub fn uav_positions(&self) -> Vec<Point> {
        self.uavs.iter().map(|u| u.position).collect()
    }
}

fn push_corrections(out: &mut String, corrections: &[String]) {
    for c in corrections {
        out.push_str("\n\n");
        out.push_str(c);
    }
}

impl CorrectablePrompt for MissionPrompt {
    fn append_correction(&mut self, text: String) {
        self.correction_history.push(text);
    }

    fn corrections(&self) -> &[String] {
        &self.correction_history
    }

    fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "MISSION\n{}\n", self.mission_command);
        let _ = writeln!(out, "UAVS ({})", self.uavs.len());
        for (k, u) in self.uavs.iter().enumerate() {
            let _ = writeln!(
                out,
                "uav_{k} position_m=({:.1}, {:.1}) energy={:.1}%",
                u.position.x,
                u.position.y,
                u.energy_fraction * 100.0
            );
        }
        let _ = writeln!(out, "\nSURVEY POINTS ({})", self.survey_points.len());
        for (id, p) in &self.survey_points {
            let _ = writeln!(out, "point {id} at_m=({:.1}, {:.1})", p.x, p.y);
        }
        out.push_str(
            "\nOBJECTIVES\n\
             1. Coverage efficiency: every survey point must be visited.\n\
             2. Minimize the travel distance of each UAV.\n\
             3. Balance the workload across UAVs.\n\
             4. No overlap: assign each survey point to exactly one UAV.\n\
             \nOUTPUT FORMAT\n\
             Reply with a single JSON object mapping \"uav_<k>\" to the list of survey point ids for that UAV, \
             for example {\"uav_0\":[1,2],\"uav_1\":[3]}.",
        );
        push_corrections(&mut out, &self.correction_history);
        out
    }
}

/// Local prompt for one UAV's route planner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePrompt {
    pub assigned: Vec<(PointId, Point)>,
    pub uav_state_summary: String,
    pub correction_history: Vec<String>,
}

pub fn build_route_prompt(assigned: &[SurveyPoint], uav_state_summary: &str) -> RoutePrompt {
    RoutePrompt {
        assigned: assigned.iter().map(|p| (p.id, p.position)).collect(),
        uav_state_summary: uav_state_summary.to_string(),
        correction_history: Vec::new(),
    }
}

impl CorrectablePrompt for RoutePrompt {
    fn append_correction(&mut self, text: String) {
        self.correction_history.push(text);
    }

    fn corrections(&self) -> &[String] {
        &self.correction_history
    }

    fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "UAV STATE\n{}\n", self.uav_state_summary);
        let _ = writeln!(out, "ASSIGNED SURVEY POINTS ({})", self.assigned.len());
        for (id, p) in &self.assigned {
            let _ = writeln!(out, "point {id} at_m=({:.1}, {:.1})", p.x, p.y);
        }
        out.push_str(
            "\nOBJECTIVE\nVisit every assigned survey point exactly once while minimizing flight distance.\n\
             \nOUTPUT FORMAT\nReply with a JSON array of survey point ids in visiting order, for example [3,1,2].",
        );
        push_corrections(&mut out, &self.correction_history);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::MISSION_EXTRA_CORRECTION;
    use crate::fire_world::Cell;

    fn survey3() -> SurveySet {
        SurveySet {
            update_index: 0,
            cell_size_m: 450.0,
            points: (0..3)
                .map(|i| SurveyPoint {
                    id: PointId(i),
                    position: Point::new(i as f64 * 450.0, 0.0),
                    cell: Cell::new(i as usize, 0),
                })
                .collect(),
        }
    }

    fn uavs(n: usize) -> Vec<UavDescriptor> {
        (0..n)
            .map(|id| UavDescriptor {
                id,
                position: Point::default(),
                energy_fraction: 1.0,
            })
            .collect()
    }

    #[test]
    fn mission_prompt_lists_everything_once() {
        let p = build_mission_prompt(DEFAULT_MISSION_COMMAND, uavs(2), &survey3());
        let text = p.render();
        assert_eq!(text.lines().filter(|l| l.starts_with("point ")).count(), 3);
        assert_eq!(text.lines().filter(|l| l.starts_with("uav_")).count(), 2);
        assert!(text.contains("OBJECTIVES"));
        assert!(text.ends_with("{\"uav_0\":[1,2],\"uav_1\":[3]}."));
    }

    #[test]
    fn corrections_are_appended_blocks() {
        let mut p = build_mission_prompt(DEFAULT_MISSION_COMMAND, uavs(2), &survey3());
        let before = p.render();
        p.append_correction(MISSION_EXTRA_CORRECTION.to_string());
        let after = p.render();
        assert!(after.ends_with(MISSION_EXTRA_CORRECTION));
        assert_eq!(after, format!("{before}\n\n{MISSION_EXTRA_CORRECTION}"));
    }

    #[test]
    fn route_prompt_lists_assigned_points() {
        let s = survey3();
        let text = build_route_prompt(&s.points, "uav_0 at (0, 0)").render();
        assert_eq!(text.lines().filter(|l| l.starts_with("point ")).count(), 3);
    }
}
