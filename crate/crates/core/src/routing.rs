//! Per-UAV open flight routes over assigned survey points.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{validate_ids, ValidationVerdict};
use crate::fire_world::{PointId, PositionMap, SurveyPoint};
use crate::geometry::Point;

pub const DEFAULT_MAX_PASSES: usize = 20;

/// Swaps must shorten the route by more than this many meters.
const IMPROVEMENT_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("route references survey point {0} which has no known position")]
    UnknownPoint(PointId),
}

/// An open path starting at `start` and visiting `waypoints` in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub uav_index: usize,
    pub start: Point,
    pub waypoints: Vec<PointId>,
}

impl Route {
    pub fn new(uav_index: usize, start: Point, waypoints: Vec<PointId>) -> Self {
        Self {
            uav_index,
            start,
            waypoints,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }
}

/// Greedy nearest-neighbour chain from `start`; ties go to the lower id.
pub fn nn_route(uav_index: usize, start: Point, assigned: &[SurveyPoint]) -> Route {
    let mut left: Vec<&SurveyPoint> = assigned.iter().collect();
    left.sort_by_key(|p| p.id);
    let mut here = start;
    let mut waypoints = Vec::with_capacity(left.len());
    while !left.is_empty() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, p) in left.iter().enumerate() {
            let d = here.distance(&p.position);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        let p = left.remove(best);
        here = p.position;
        waypoints.push(p.id);
    }
    Route::new(uav_index, start, waypoints)
}

fn resolve(route: &Route, positions: &PositionMap) -> Result<Vec<Point>, RoutingError> {
    let mut pts = Vec::with_capacity(route.waypoints.len() + 1);
    pts.push(route.start);
    for id in &route.waypoints {
        pts.push(*positions.get(id).ok_or(RoutingError::UnknownPoint(*id))?);
    }
    Ok(pts)
}

/// Sum of leg lengths from the start through every waypoint.
pub fn route_length(route: &Route, positions: &PositionMap) -> Result<f64, RoutingError> {
    let pts = resolve(route, positions)?;
    Ok(path_length(&pts))
}

fn path_length(pts: &[Point]) -> f64 {
    pts.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

/// 2-opt local search on an open path with a fixed start. Each pass scans
/// every segment reversal and applies improving ones as found; stops after a
/// pass with no improvement or after `max_passes` passes.
pub fn two_opt(route: &Route, positions: &PositionMap, max_passes: usize) -> Result<Route, RoutingError> {
    let mut pts = resolve(route, positions)?;
    let mut ids = route.waypoints.clone();
    let n = ids.len();
    if n < 2 {
        return Ok(route.clone());
    }
    // pts[0] is the start; waypoint k sits at pts[k + 1].
    for _ in 0..max_passes {
        let mut improved = false;
        for i in 1..n {
            for j in (i + 1)..=n {
                let before = pts[i - 1].distance(&pts[i]) + tail(&pts, j);
                let after = pts[i - 1].distance(&pts[j]) + if j < n { pts[i].distance(&pts[j + 1]) } else { 0.0 };
                if after < before - IMPROVEMENT_EPS {
                    pts[i..=j].reverse();
                    ids[i - 1..j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(Route::new(route.uav_index, route.start, ids))
}

fn tail(pts: &[Point], j: usize) -> f64 {
    pts.get(j + 1).map_or(0.0, |next| pts[j].distance(next))
}

/// Nearest-neighbour construction followed by 2-opt.
pub fn plan_route(uav_index: usize, start: Point, assigned: &[SurveyPoint], max_passes: usize) -> Route {
    let positions: PositionMap = assigned.iter().map(|p| (p.id, p.position)).collect();
    let route = nn_route(uav_index, start, assigned);
    two_opt(&route, &positions, max_passes).expect("every waypoint comes from `assigned`")
}

/// Set-equality check of route waypoints against the assigned ids.
pub fn validate_route(route: &Route, assigned: &BTreeSet<PointId>) -> ValidationVerdict {
    validate_ids(&route.waypoints, assigned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::VerdictKind;
    use crate::fire_world::Cell;

    fn sp(id: u32, x: f64, y: f64) -> SurveyPoint {
        SurveyPoint {
            id: PointId(id),
            position: Point::new(x, y),
            cell: Cell::new(0, 0),
        }
    }

    fn pos(points: &[SurveyPoint]) -> PositionMap {
        points.iter().map(|p| (p.id, p.position)).collect()
    }

    fn ids(v: &[u32]) -> Vec<PointId> {
        v.iter().map(|i| PointId(*i)).collect()
    }

    #[test]
    fn nn_collinear_chain() {
        let pts = [sp(1, 0.0, 100.0), sp(2, 0.0, 300.0), sp(3, 0.0, 200.0)];
        assert_eq!(nn_route(0, Point::default(), &pts).waypoints, ids(&[1, 3, 2]));
        assert_eq!(nn_route(0, Point::default(), &pts[..1]).waypoints, ids(&[1]));
        assert!(nn_route(0, Point::default(), &[]).is_empty());
    }

    #[test]
    fn two_opt_uncrosses_square() {
        let pts = [sp(1, 100.0, 100.0), sp(2, 100.0, 0.0), sp(3, 0.0, 100.0)];
        let map = pos(&pts);
        let crossed = Route::new(0, Point::default(), ids(&[1, 2, 3]));
        assert!((route_length(&crossed, &map).unwrap() - (200.0 * 2f64.sqrt() + 100.0)).abs() < 1e-9);
        let fixed = two_opt(&crossed, &map, DEFAULT_MAX_PASSES).unwrap();
        assert_eq!(fixed.waypoints, ids(&[2, 1, 3]));
        assert!((route_length(&fixed, &map).unwrap() - 300.0).abs() < 1e-9);
    }

    #[test]
    fn two_opt_leaves_optimal_route_alone() {
        let pts = [sp(1, 0.0, 100.0), sp(2, 0.0, 200.0), sp(3, 0.0, 300.0)];
        let r = Route::new(0, Point::default(), ids(&[1, 2, 3]));
        assert_eq!(two_opt(&r, &pos(&pts), DEFAULT_MAX_PASSES).unwrap(), r);
    }

    #[test]
    fn length_examples() {
        let pts = [sp(1, 0.0, 450.0), sp(2, 0.0, 900.0), sp(3, 0.0, 1350.0), sp(4, 300.0, 400.0)];
        let map = pos(&pts);
        assert_eq!(route_length(&Route::new(0, Point::default(), ids(&[1, 2, 3])), &map).unwrap(), 1350.0);
        assert_eq!(route_length(&Route::new(0, Point::default(), vec![]), &map).unwrap(), 0.0);
        assert_eq!(route_length(&Route::new(0, Point::default(), ids(&[4])), &map).unwrap(), 500.0);
        assert_eq!(
            route_length(&Route::new(0, Point::default(), ids(&[77])), &map),
            Err(RoutingError::UnknownPoint(PointId(77)))
        );
    }

    #[test]
    fn route_validation_examples() {
        let a: BTreeSet<_> = ids(&[1, 2, 3]).into_iter().collect();
        let r = |w: &[u32]| Route::new(0, Point::default(), ids(w));
        assert_eq!(validate_route(&r(&[2, 1, 3]), &a).kind(), VerdictKind::Valid);
        let v = validate_route(&r(&[1, 2, 9]), &ids(&[1, 2]).into_iter().collect());
        assert_eq!((v.kind(), v.extra.clone()), (VerdictKind::ExtraOrInvented, ids(&[9])));
        let v = validate_route(&r(&[1, 2]), &a);
        assert_eq!((v.kind(), v.missing.clone()), (VerdictKind::Missing, ids(&[3])));
    }
}
