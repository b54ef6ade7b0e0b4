//! Survey-point assignment: the greedy distance-plus-workload baseline and
//! the partition checks applied to every planner output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::ser::SerializeMap;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::fire_world::{PointId, SurveySet};
use crate::geometry::Point;

/// Default workload penalty coefficient.
pub const DEFAULT_PENALTY_COEFFICIENT: f64 = 800.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssignmentError {
    #[error("workload penalty needs at least one UAV count")]
    EmptyCounts,
    #[error("UAV index {index} out of range for {count} UAVs")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("correction requested for a valid verdict")]
    CorrectionForValid,
}

/// Per-UAV ordered lists of survey point ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    lists: Vec<Vec<PointId>>,
}

impl Assignment {
    pub fn empty(uav_count: usize) -> Self {
        Self {
            lists: vec![Vec::new(); uav_count],
        }
    }

    pub fn from_lists(lists: Vec<Vec<PointId>>) -> Self {
        Self { lists }
    }

    pub fn uav_count(&self) -> usize {
        self.lists.len()
    }

    pub fn points_for(&self, uav: usize) -> &[PointId] {
        &self.lists[uav]
    }

    pub fn lists(&self) -> &[Vec<PointId>] {
        &self.lists
    }

    pub fn lists_mut(&mut self) -> &mut Vec<Vec<PointId>> {
        &mut self.lists
    }

    pub fn counts(&self) -> Vec<usize> {
        self.lists.iter().map(Vec::len).collect()
    }

    /// Total number of assigned entries, duplicates included.
    pub fn total(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }

    pub fn push(&mut self, uav: usize, id: PointId) {
        self.lists[uav].push(id);
    }

    /// Wire form: `{"uav_0":[..],"uav_1":[..]}` in UAV index order.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("assignment serializes")
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.lists.len()))?;
        for (i, list) in self.lists.iter().enumerate() {
            map.serialize_entry(&format!("uav_{i}"), list)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, Vec<PointId>>::deserialize(deserializer)?;
        let mut lists = Vec::new();
        for (key, ids) in raw {
            let k: usize = key
                .strip_prefix("uav_")
                .and_then(|k| k.parse().ok())
                .ok_or_else(|| D::Error::custom(format!("unexpected key {key:?}")))?;
            if lists.len() <= k {
                lists.resize(k + 1, Vec::new());
            }
            lists[k] = ids;
        }
        Ok(Self { lists })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyParams {
    pub lambda: f64,
    pub penalty_coefficient: f64,
}

impl Default for GreedyParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            penalty_coefficient: DEFAULT_PENALTY_COEFFICIENT,
        }
    }
}

/// `max(0, counts[i] - mean(counts)) * b`
pub fn workload_penalty(counts: &[usize], i: usize, b: f64) -> Result<f64, AssignmentError> {
    if counts.is_empty() {
        return Err(AssignmentError::EmptyCounts);
    }
    let own = *counts.get(i).ok_or(AssignmentError::IndexOutOfRange {
        index: i,
        count: counts.len(),
    })?;
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    Ok((own as f64 - mean).max(0.0) * b)
}

/// `distance + lambda * penalty`
pub fn assignment_metric(distance: f64, penalty: f64, lambda: f64) -> f64 {
    distance + lambda * penalty
}

/// Greedy baseline: repeatedly picks the (UAV, point) pair with the smallest
/// assignment metric among all unassigned points, then moves that UAV's
/// current position onto the point. Ties go to the lower UAV index, then the
/// lower point id.
pub fn greedy_assign(uav_positions: &[Point], survey: &SurveySet, params: &GreedyParams) -> Assignment {
    let n = uav_positions.len();
    let mut assignment = Assignment::empty(n);
    if n == 0 {
        return assignment;
    }
    let mut remaining: Vec<_> = survey.points.iter().map(|p| (p.id, p.position)).collect();
    remaining.sort_by_key(|(id, _)| *id);
    let mut current = uav_positions.to_vec();
    let mut counts = vec![0usize; n];

    while !remaining.is_empty() {
        let mut best: Option<(f64, usize, usize)> = None;
        for (u, pos) in current.iter().enumerate() {
            let penalty = workload_penalty(&counts, u, params.penalty_coefficient).expect("n > 0");
            for (k, (_, p)) in remaining.iter().enumerate() {
                let c = assignment_metric(pos.distance(p), penalty, params.lambda);
                if best.is_none_or(|(bc, _, _)| c < bc) {
                    best = Some((c, u, k));
                }
            }
        }
        let (_, u, k) = best.expect("remaining is non-empty");
        let (id, p) = remaining.remove(k);
        assignment.push(u, id);
        counts[u] += 1;
        current[u] = p;
    }
    assignment
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Valid,
    ExtraOrInvented,
    Missing,
    Both,
}

/// Outcome of comparing a planner's id lists against the expected id set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationVerdict {
    /// Surplus duplicate occurrences and ids outside the expected set.
    pub extra: Vec<PointId>,
    /// Expected ids that were never assigned.
    pub missing: Vec<PointId>,
    /// Sum of list lengths, as compared by a cardinality-only check.
    pub assigned_total: usize,
    pub expected_total: usize,
}

impl ValidationVerdict {
    pub fn kind(&self) -> VerdictKind {
        match (self.extra.is_empty(), self.missing.is_empty()) {
            (true, true) => VerdictKind::Valid,
            (false, true) => VerdictKind::ExtraOrInvented,
            (true, false) => VerdictKind::Missing,
            (false, false) => VerdictKind::Both,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.kind() == VerdictKind::Valid
    }
}

impl fmt::Display for ValidationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} (assigned {} / expected {}",
            self.kind(),
            self.assigned_total,
            self.expected_total
        )?;
        if !self.extra.is_empty() {
            write!(f, ", extra {:?}", self.extra.iter().map(|p| p.0).collect::<Vec<_>>())?;
        }
        if !self.missing.is_empty() {
            write!(f, ", missing {:?}", self.missing.iter().map(|p| p.0).collect::<Vec<_>>())?;
        }
        f.write_str(")")
    }
}

/// Set-equality check of a multiset of ids against `expected`.
pub fn validate_ids<'a>(assigned: impl IntoIterator<Item = &'a PointId>, expected: &BTreeSet<PointId>) -> ValidationVerdict {
    let mut seen: BTreeMap<PointId, usize> = BTreeMap::new();
    let mut total = 0;
    for id in assigned {
        *seen.entry(*id).or_default() += 1;
        total += 1;
    }
    let mut extra = Vec::new();
    for (id, n) in &seen {
        let surplus = if expected.contains(id) { n - 1 } else { *n };
        extra.extend(std::iter::repeat_n(*id, surplus));
    }
    let missing = expected.iter().filter(|id| !seen.contains_key(id)).copied().collect();
    ValidationVerdict {
        extra,
        missing,
        assigned_total: total,
        expected_total: expected.len(),
    }
}

pub fn validate_assignment(assignment: &Assignment, survey: &SurveySet) -> ValidationVerdict {
    validate_ids(assignment.lists.iter().flatten(), &survey.ids())
}

/// Which planner a correction is addressed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrectionContext {
    Mission,
    Route,
}

pub const MISSION_EXTRA_CORRECTION: &str =
    "You are hallucinating, creating more survey points than required. Do not invent, modify, or add any new points.";
pub const MISSION_MISSING_CORRECTION: &str =
    "You have not assigned all survey points to UAVs. You must allocate all survey points to UAVs.";
pub const ROUTE_EXTRA_CORRECTION: &str =
    "You have used more survey points than required. Do not invent, modify, or add any new points.";
pub const ROUTE_MISSING_CORRECTION: &str = "You have generated a flight route not including all assigned survey points. You must visit every assigned survey point.";

pub fn extra_correction(context: CorrectionContext) -> &'static str {
    match context {
        CorrectionContext::Mission => MISSION_EXTRA_CORRECTION,
        CorrectionContext::Route => ROUTE_EXTRA_CORRECTION,
    }
}

pub fn missing_correction(context: CorrectionContext) -> &'static str {
    match context {
        CorrectionContext::Mission => MISSION_MISSING_CORRECTION,
        CorrectionContext::Route => ROUTE_MISSING_CORRECTION,
    }
}

/// Text appended to a planner prompt after a failed validation.
pub fn correction_message(verdict: &ValidationVerdict, context: CorrectionContext) -> Result<String, AssignmentError> {
    let extra = extra_correction(context);
    let missing = missing_correction(context);
    match verdict.kind() {
        VerdictKind::Valid => Err(AssignmentError::CorrectionForValid),
        VerdictKind::ExtraOrInvented => Ok(extra.to_string()),
        VerdictKind::Missing => Ok(missing.to_string()),
        VerdictKind::Both => Ok(format!("{extra}\n{missing}")),
    }
}
