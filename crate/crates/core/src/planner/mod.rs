//! Planner interface and the bounded plan → validate → correct → re-plan
//! loop used for both mission assignment and per-UAV routing.
//!
//! A planner replies either with a structured plan or with raw text that is
//! parsed first. Every reply is checked for an exact partition of the
//! expected survey points. On failure the matching correction string is
//! appended to the prompt and the planner is asked again, up to
//! `max_retries` times, after which a guaranteed-valid fallback is used.

pub mod cluster;
pub mod parse;
pub mod prompt;
pub mod remote;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{
    correction_message, extra_correction, greedy_assign, validate_assignment, Assignment, CorrectionContext,
    GreedyParams, ValidationVerdict,
};
use crate::fire_world::{PointId, SurveyPoint, SurveySet};
use crate::geometry::Point;
use crate::routing::{plan_route, validate_route, Route, DEFAULT_MAX_PASSES};

pub use cluster::cluster_plan;
pub use parse::{parse_assignment, parse_route, ParseError};
pub use prompt::{
    build_mission_prompt, build_route_prompt, CorrectablePrompt, MissionPrompt, RoutePrompt, UavDescriptor,
    DEFAULT_MISSION_COMMAND,
};
pub use remote::{remote_plan, RemoteClient, RemoteConfig, RemoteError};

pub const DEFAULT_MAX_RETRIES: usize = 3;

/// Text returned by the garbage-output fault.
pub const GARBAGE_REPLY: &str = "I cannot help with that.";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanningError {
    #[error("{planner} planner failed on attempt {attempt}: {source}")]
    Remote {
        planner: String,
        attempt: usize,
        #[source]
        source: RemoteError,
    },
    #[error("fault injection cannot wrap another fault-injected planner")]
    NestedFault,
    #[error("fallback planner produced an invalid plan: {0}")]
    FallbackInvalid(ValidationVerdict),
    #[error("fallback planner output unparseable: {0}")]
    FallbackUnparseable(ParseError),
    #[error("planner plugin failed: {0}")]
    Plugin(String),
}

/// A planner reply before validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Reply<T> {
    Structured(T),
    Text(String),
}

/// Extension point for mission planners not built into this crate.
pub trait MissionPlanner: Send + Sync {
    fn name(&self) -> String;
    /// `attempt` counts from 1 within an episode.
    fn propose(&self, prompt: &MissionPrompt, survey: &SurveySet, attempt: usize)
        -> Result<Reply<Assignment>, PlanningError>;
}

/// Extension point for onboard route planners.
pub trait RoutePlanner: Send + Sync {
    fn name(&self) -> String;
    fn propose(&self, prompt: &RoutePrompt, start: Point, attempt: usize) -> Result<Reply<Vec<PointId>>, PlanningError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaultKind {
    /// Copies one assigned id into another list.
    Duplicate,
    /// Removes one assigned id.
    Drop,
    /// Adds an id that is not a survey point.
    Invent,
    /// Replaces the reply with unparseable text.
    Garbage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultConfig {
    pub fault: FaultKind,
    pub probability: f64,
    pub seed: u64,
    /// Only attempts `1..=n` are eligible for faults when set.
    pub faulty_attempts: Option<usize>,
}

impl FaultConfig {
    pub fn always(fault: FaultKind) -> Self {
        Self {
            fault,
            probability: 1.0,
            seed: 0,
            faulty_attempts: None,
        }
    }

    pub fn first_attempts(fault: FaultKind, n: usize) -> Self {
        Self {
            faulty_attempts: Some(n),
            ..Self::always(fault)
        }
    }
}

#[derive(Clone)]
pub enum PlannerKind {
    Greedy(GreedyParams),
    Cluster,
    Remote(RemoteConfig),
    FaultInjected(Box<PlannerKind>, FaultConfig),
    Plugin(Arc<dyn MissionPlanner>),
}

impl PlannerKind {
    pub fn fault_injected(inner: PlannerKind, faults: FaultConfig) -> Result<Self, PlanningError> {
        if matches!(inner, PlannerKind::FaultInjected(..)) {
            return Err(PlanningError::NestedFault);
        }
        Ok(PlannerKind::FaultInjected(Box::new(inner), faults))
    }

    pub fn name(&self) -> String {
        match self {
            PlannerKind::Greedy(_) => "greedy".into(),
            PlannerKind::Cluster => "cluster".into(),
            PlannerKind::Remote(_) => "remote".into(),
            PlannerKind::FaultInjected(inner, faults) => format!("fault({:?}, {})", faults.fault, inner.name()),
            PlannerKind::Plugin(p) => p.name(),
        }
    }
}

impl fmt::Debug for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone)]
pub enum RoutePlannerKind {
    NearestTwoOpt { max_passes: usize },
    Remote(RemoteConfig),
    FaultInjected(Box<RoutePlannerKind>, FaultConfig),
    Plugin(Arc<dyn RoutePlanner>),
}

impl Default for RoutePlannerKind {
    fn default() -> Self {
        RoutePlannerKind::NearestTwoOpt {
            max_passes: DEFAULT_MAX_PASSES,
        }
    }
}

impl RoutePlannerKind {
    pub fn fault_injected(inner: RoutePlannerKind, faults: FaultConfig) -> Result<Self, PlanningError> {
        if matches!(inner, RoutePlannerKind::FaultInjected(..)) {
            return Err(PlanningError::NestedFault);
        }
        Ok(RoutePlannerKind::FaultInjected(Box::new(inner), faults))
    }

    pub fn name(&self) -> String {
        match self {
            RoutePlannerKind::NearestTwoOpt { .. } => "nn2opt".into(),
            RoutePlannerKind::Remote(_) => "remote".into(),
            RoutePlannerKind::FaultInjected(inner, faults) => format!("fault({:?}, {})", faults.fault, inner.name()),
            RoutePlannerKind::Plugin(p) => p.name(),
        }
    }
}

impl fmt::Debug for RoutePlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// What happened on one planner call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttemptOutcome {
    Verdict(ValidationVerdict),
    ParseFailure(String),
}

impl AttemptOutcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, AttemptOutcome::Verdict(v) if v.is_valid())
    }

    pub fn verdict(&self) -> Option<&ValidationVerdict> {
        match self {
            AttemptOutcome::Verdict(v) => Some(v),
            AttemptOutcome::ParseFailure(_) => None,
        }
    }
}

/// Audit record of one mission-planning episode.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanningEpisode {
    pub planner: String,
    /// Primary planner calls; the fallback call is not counted.
    pub attempts: usize,
    pub final_assignment: Assignment,
    pub outcomes: Vec<AttemptOutcome>,
    pub fallback_used: bool,
    /// Prompt as sent on the last primary attempt.
    pub prompt: MissionPrompt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteEpisode {
    pub planner: String,
    pub attempts: usize,
    pub route: Route,
    pub outcomes: Vec<AttemptOutcome>,
    pub fallback_used: bool,
    pub prompt: RoutePrompt,
}

fn fault_fires(faults: &FaultConfig, rng: &mut ChaCha8Rng, attempt: usize) -> bool {
    if faults.faulty_attempts.is_some_and(|n| attempt > n) {
        return false;
    }
    faults.probability >= 1.0 || rng.random::<f64>() < faults.probability
}

/// Applies a structural fault to id lists. `never_used` is an id guaranteed
/// not to be a survey point.
fn corrupt(lists: &mut [Vec<PointId>], fault: FaultKind, rng: &mut ChaCha8Rng, never_used: PointId) {
    let entries: Vec<(usize, usize)> = lists
        .iter()
        .enumerate()
        .flat_map(|(l, list)| (0..list.len()).map(move |k| (l, k)))
        .collect();
    match fault {
        FaultKind::Duplicate => {
            if entries.is_empty() {
                return;
            }
            let (l, k) = entries[rng.random_range(0..entries.len())];
            let id = lists[l][k];
            let target = (l + 1) % lists.len();
            lists[target].push(id);
        }
        FaultKind::Drop => {
            if entries.is_empty() {
                return;
            }
            let (l, k) = entries[rng.random_range(0..entries.len())];
            lists[l].remove(k);
        }
        FaultKind::Invent => {
            if lists.is_empty() {
                return;
            }
            let l = rng.random_range(0..lists.len());
            lists[l].push(never_used);
        }
        FaultKind::Garbage => {}
    }
}

fn invented_id<'a>(known: impl Iterator<Item = &'a PointId>) -> PointId {
    PointId(known.map(|p| p.0).max().map_or(0, |m| m.saturating_add(1_000)))
}

enum MissionSession {
    Greedy(GreedyParams),
    Cluster,
    Remote(RemoteClient),
    Plugin(Arc<dyn MissionPlanner>),
    Faulty {
        inner: Box<MissionSession>,
        faults: FaultConfig,
        rng: ChaCha8Rng,
    },
}

impl MissionSession {
    fn open(kind: &PlannerKind) -> Result<Self, PlanningError> {
        Ok(match kind {
            PlannerKind::Greedy(p) => MissionSession::Greedy(*p),
            PlannerKind::Cluster => MissionSession::Cluster,
            PlannerKind::Remote(cfg) => MissionSession::Remote(RemoteClient::from_env(cfg.clone()).map_err(|source| {
                PlanningError::Remote {
                    planner: "remote".into(),
                    attempt: 1,
                    source,
                }
            })?),
            PlannerKind::Plugin(p) => MissionSession::Plugin(p.clone()),
            PlannerKind::FaultInjected(inner, faults) => {
                if matches!(**inner, PlannerKind::FaultInjected(..)) {
                    return Err(PlanningError::NestedFault);
                }
                MissionSession::Faulty {
                    inner: Box::new(Self::open(inner)?),
                    faults: *faults,
                    rng: ChaCha8Rng::seed_from_u64(faults.seed),
                }
            }
        })
    }

    fn propose(
        &mut self,
        prompt: &MissionPrompt,
        survey: &SurveySet,
        attempt: usize,
    ) -> Result<Reply<Assignment>, PlanningError> {
        match self {
            MissionSession::Greedy(p) => Ok(Reply::Structured(greedy_assign(&prompt.uav_positions(), survey, p))),
            MissionSession::Cluster => Ok(Reply::Structured(cluster_plan(&prompt.uav_positions(), survey))),
            MissionSession::Remote(client) => client
                .complete(prompt::MISSION_SYSTEM_MESSAGE, &prompt.render())
                .map(|c| Reply::Text(c.text))
                .map_err(|source| PlanningError::Remote {
                    planner: "remote".into(),
                    attempt,
                    source,
                }),
            MissionSession::Plugin(p) => p.propose(prompt, survey, attempt),
            MissionSession::Faulty { inner, faults, rng } => {
                let reply = inner.propose(prompt, survey, attempt)?;
                if !fault_fires(faults, rng, attempt) {
                    return Ok(reply);
                }
                if faults.fault == FaultKind::Garbage {
                    return Ok(Reply::Text(GARBAGE_REPLY.into()));
                }
                let mut plan = match reply {
                    Reply::Structured(a) => a,
                    Reply::Text(t) => match parse_assignment(&t, survey, prompt.uavs.len()) {
                        Ok(a) => a,
                        Err(_) => return Ok(Reply::Text(t)),
                    },
                };
                let never = invented_id(survey.points.iter().map(|p| &p.id));
                corrupt(plan.lists_mut(), faults.fault, rng, never);
                Ok(Reply::Structured(plan))
            }
        }
    }
}

/// Runs up to `max_retries + 1` planner calls, appending one correction
/// block to the prompt before every re-plan. Returns the first valid plan.
fn validation_loop<T, P: CorrectablePrompt>(
    prompt: &mut P,
    max_retries: usize,
    context: CorrectionContext,
    mut propose: impl FnMut(&P, usize) -> Result<Result<T, ParseError>, PlanningError>,
    validate: impl Fn(&T) -> ValidationVerdict,
) -> Result<(Option<T>, Vec<AttemptOutcome>), PlanningError> {
    let mut outcomes = Vec::new();
    for attempt in 1..=max_retries + 1 {
        let correction = match propose(prompt, attempt)? {
            Ok(plan) => {
                let verdict = validate(&plan);
                if verdict.is_valid() {
                    outcomes.push(AttemptOutcome::Verdict(verdict));
                    return Ok((Some(plan), outcomes));
                }
                let text = correction_message(&verdict, context).expect("verdict is not valid");
                outcomes.push(AttemptOutcome::Verdict(verdict));
                text
            }
            // unparseable output is treated like an invented plan
            Err(e) => {
                outcomes.push(AttemptOutcome::ParseFailure(e.to_string()));
                extra_correction(context).to_string()
            }
        };
        if attempt <= max_retries {
            prompt.append_correction(correction);
        }
    }
    Ok((None, outcomes))
}

/// Mission planning with validation, correction and fallback.
pub fn plan_with_validation(
    planner: &PlannerKind,
    mut prompt: MissionPrompt,
    survey: &SurveySet,
    max_retries: usize,
    fallback: &PlannerKind,
) -> Result<PlanningEpisode, PlanningError> {
    let uav_count = prompt.uavs.len();
    let mut session = MissionSession::open(planner)?;
    let (plan, outcomes) = validation_loop(
        &mut prompt,
        max_retries,
        CorrectionContext::Mission,
        |p, attempt| {
            Ok(match session.propose(p, survey, attempt)? {
                Reply::Structured(a) => Ok(a),
                Reply::Text(t) => parse_assignment(&t, survey, uav_count),
            })
        },
        |a| validate_assignment(a, survey),
    )?;
    let attempts = outcomes.len();
    if let Some(final_assignment) = plan {
        return Ok(PlanningEpisode {
            planner: planner.name(),
            attempts,
            final_assignment,
            outcomes,
            fallback_used: false,
            prompt,
        });
    }
    let mut backup = MissionSession::open(fallback)?;
    let assignment = match backup.propose(&prompt, survey, attempts + 1)? {
        Reply::Structured(a) => a,
        Reply::Text(t) => parse_assignment(&t, survey, uav_count).map_err(PlanningError::FallbackUnparseable)?,
    };
    let verdict = validate_assignment(&assignment, survey);
    if !verdict.is_valid() {
        return Err(PlanningError::FallbackInvalid(verdict));
    }
    Ok(PlanningEpisode {
        planner: planner.name(),
        attempts,
        final_assignment: assignment,
        outcomes,
        fallback_used: true,
        prompt,
    })
}

enum RouteSession {
    Nearest { max_passes: usize },
    Remote(RemoteClient),
    Plugin(Arc<dyn RoutePlanner>),
    Faulty {
        inner: Box<RouteSession>,
        faults: FaultConfig,
        rng: ChaCha8Rng,
    },
}

impl RouteSession {
    fn open(kind: &RoutePlannerKind) -> Result<Self, PlanningError> {
        Ok(match kind {
            RoutePlannerKind::NearestTwoOpt { max_passes } => RouteSession::Nearest {
                max_passes: *max_passes,
            },
            RoutePlannerKind::Remote(cfg) => RouteSession::Remote(RemoteClient::from_env(cfg.clone()).map_err(
                |source| PlanningError::Remote {
                    planner: "remote route".into(),
                    attempt: 1,
                    source,
                },
            )?),
            RoutePlannerKind::Plugin(p) => RouteSession::Plugin(p.clone()),
            RoutePlannerKind::FaultInjected(inner, faults) => {
                if matches!(**inner, RoutePlannerKind::FaultInjected(..)) {
                    return Err(PlanningError::NestedFault);
                }
                RouteSession::Faulty {
                    inner: Box::new(Self::open(inner)?),
                    faults: *faults,
                    rng: ChaCha8Rng::seed_from_u64(faults.seed),
                }
            }
        })
    }

    fn propose(&mut self, prompt: &RoutePrompt, start: Point, attempt: usize) -> Result<Reply<Vec<PointId>>, PlanningError> {
        match self {
            RouteSession::Nearest { max_passes } => {
                let pts = prompt_points(prompt);
                Ok(Reply::Structured(plan_route(0, start, &pts, *max_passes).waypoints))
            }
            RouteSession::Remote(client) => client
                .complete(prompt::ROUTE_SYSTEM_MESSAGE, &prompt.render())
                .map(|c| Reply::Text(c.text))
                .map_err(|source| PlanningError::Remote {
                    planner: "remote route".into(),
                    attempt,
                    source,
                }),
            RouteSession::Plugin(p) => p.propose(prompt, start, attempt),
            RouteSession::Faulty { inner, faults, rng } => {
                let reply = inner.propose(prompt, start, attempt)?;
                if !fault_fires(faults, rng, attempt) {
                    return Ok(reply);
                }
                if faults.fault == FaultKind::Garbage {
                    return Ok(Reply::Text(GARBAGE_REPLY.into()));
                }
                let ids = match reply {
                    Reply::Structured(ids) => ids,
                    Reply::Text(t) => match parse_route(&t, 0, start) {
                        Ok(r) => r.waypoints,
                        Err(_) => return Ok(Reply::Text(t)),
                    },
                };
                let mut lists = [ids];
                let never = invented_id(prompt.assigned.iter().map(|(id, _)| id));
                corrupt(&mut lists, faults.fault, rng, never);
                let [ids] = lists;
                Ok(Reply::Structured(ids))
            }
        }
    }
}

fn prompt_points(prompt: &RoutePrompt) -> Vec<SurveyPoint> {
    prompt
        .assigned
        .iter()
        .map(|(id, p)| SurveyPoint {
            id: *id,
            position: *p,
            cell: crate::fire_world::Cell::new(0, 0),
        })
        .collect()
}

/// Route planning with validation, correction, and a nearest-neighbour +
/// 2-opt fallback.
pub fn plan_route_with_validation(
    planner: &RoutePlannerKind,
    mut prompt: RoutePrompt,
    uav_index: usize,
    start: Point,
    max_retries: usize,
    fallback_max_passes: usize,
) -> Result<RouteEpisode, PlanningError> {
    let expected: BTreeSet<PointId> = prompt.assigned.iter().map(|(id, _)| *id).collect();
    let mut session = RouteSession::open(planner)?;
    let (plan, outcomes) = validation_loop(
        &mut prompt,
        max_retries,
        CorrectionContext::Route,
        |p, attempt| {
            Ok(match session.propose(p, start, attempt)? {
                Reply::Structured(ids) => Ok(Route::new(uav_index, start, ids)),
                Reply::Text(t) => parse_route(&t, uav_index, start),
            })
        },
        |r| validate_route(r, &expected),
    )?;
    let attempts = outcomes.len();
    let (route, fallback_used) = match plan {
        Some(r) => (r, false),
        None => (plan_route(uav_index, start, &prompt_points(&prompt), fallback_max_passes), true),
    };
    Ok(RouteEpisode {
        planner: planner.name(),
        attempts,
        route,
        outcomes,
        fallback_used,
        prompt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{VerdictKind, MISSION_EXTRA_CORRECTION, MISSION_MISSING_CORRECTION};
    use crate::fire_world::Cell;

    fn survey(n: u32) -> SurveySet {
        SurveySet {
            update_index: 0,
            cell_size_m: 450.0,
            points: (0..n)
                .map(|i| SurveyPoint {
                    id: PointId(i),
                    position: Point::new((i % 4) as f64 * 450.0, (i / 4) as f64 * 450.0),
                    cell: Cell::new((i % 4) as usize, (i / 4) as usize),
                })
                .collect(),
        }
    }

    fn prompt(s: &SurveySet, n: usize) -> MissionPrompt {
        let uavs = (0..n)
            .map(|id| UavDescriptor {
                id,
                position: Point::default(),
                energy_fraction: 1.0,
            })
            .collect();
        build_mission_prompt(DEFAULT_MISSION_COMMAND, uavs, s)
    }

    fn greedy() -> PlannerKind {
        PlannerKind::Greedy(GreedyParams::default())
    }

    #[test]
    fn cluster_is_valid_first_time() {
        let s = survey(10);
        let ep = plan_with_validation(&PlannerKind::Cluster, prompt(&s, 3), &s, 3, &greedy()).unwrap();
        assert_eq!(ep.attempts, 1);
        assert!(!ep.fallback_used);
        assert!(ep.prompt.correction_history.is_empty());
    }

    #[test]
    fn nested_faults_are_rejected() {
        let f = PlannerKind::fault_injected(PlannerKind::Cluster, FaultConfig::always(FaultKind::Drop)).unwrap();
        assert_eq!(
            PlannerKind::fault_injected(f, FaultConfig::always(FaultKind::Drop)).unwrap_err(),
            PlanningError::NestedFault
        );
    }

    #[test]
    fn always_duplicating_planner_falls_back() {
        let s = survey(9);
        let kind = PlannerKind::fault_injected(PlannerKind::Cluster, FaultConfig::always(FaultKind::Duplicate)).unwrap();
        let ep = plan_with_validation(&kind, prompt(&s, 3), &s, 3, &greedy()).unwrap();
        assert_eq!(ep.attempts, 4);
        assert!(ep.fallback_used);
        assert_eq!(ep.prompt.correction_history, vec![MISSION_EXTRA_CORRECTION.to_string(); 3]);
        assert!(validate_assignment(&ep.final_assignment, &s).is_valid());
        assert_eq!(
            ep.final_assignment,
            greedy_assign(&prompt(&s, 3).uav_positions(), &s, &GreedyParams::default())
        );
    }

    #[test]
    fn single_drop_recovers_on_second_attempt() {
        let s = survey(9);
        let kind =
            PlannerKind::fault_injected(PlannerKind::Cluster, FaultConfig::first_attempts(FaultKind::Drop, 1)).unwrap();
        let ep = plan_with_validation(&kind, prompt(&s, 3), &s, 3, &greedy()).unwrap();
        assert_eq!(ep.attempts, 2);
        let kinds: Vec<_> = ep.outcomes.iter().map(|o| o.verdict().unwrap().kind()).collect();
        assert_eq!(kinds, vec![VerdictKind::Missing, VerdictKind::Valid]);
        assert_eq!(ep.prompt.correction_history, vec![MISSION_MISSING_CORRECTION.to_string()]);
        assert!(!ep.fallback_used);
    }

    #[test]
    fn garbage_counts_as_failed_attempt() {
        let s = survey(5);
        let kind = PlannerKind::fault_injected(PlannerKind::Cluster, FaultConfig::first_attempts(FaultKind::Garbage, 2))
            .unwrap();
        let ep = plan_with_validation(&kind, prompt(&s, 2), &s, 3, &greedy()).unwrap();
        assert_eq!(ep.attempts, 3);
        assert!(matches!(ep.outcomes[0], AttemptOutcome::ParseFailure(_)));
        assert_eq!(ep.prompt.correction_history, vec![MISSION_EXTRA_CORRECTION.to_string(); 2]);
    }

    #[test]
    fn zero_retries_goes_straight_to_fallback() {
        let s = survey(5);
        let kind = PlannerKind::fault_injected(PlannerKind::Cluster, FaultConfig::always(FaultKind::Invent)).unwrap();
        let ep = plan_with_validation(&kind, prompt(&s, 2), &s, 0, &greedy()).unwrap();
        assert_eq!(ep.attempts, 1);
        assert!(ep.fallback_used);
        assert!(ep.prompt.correction_history.is_empty());
    }

    #[test]
    fn faulty_fallback_is_fatal() {
        let s = survey(5);
        let bad = PlannerKind::fault_injected(PlannerKind::Cluster, FaultConfig::always(FaultKind::Drop)).unwrap();
        let err = plan_with_validation(&bad, prompt(&s, 2), &s, 1, &bad).unwrap_err();
        assert!(matches!(err, PlanningError::FallbackInvalid(_)));
    }

    #[test]
    fn route_loop_with_missing_waypoint() {
        let s = survey(3);
        let rp = build_route_prompt(&s.points, "uav_0 idle at launch");
        let kind = RoutePlannerKind::fault_injected(
            RoutePlannerKind::default(),
            FaultConfig::first_attempts(FaultKind::Drop, 1),
        )
        .unwrap();
        let ep = plan_route_with_validation(&kind, rp, 0, Point::default(), 3, 20).unwrap();
        assert_eq!(ep.attempts, 2);
        assert_eq!(ep.prompt.correction_history, vec![crate::assignment::ROUTE_MISSING_CORRECTION.to_string()]);
        assert!(validate_route(&ep.route, &s.ids()).is_valid());
    }
}
