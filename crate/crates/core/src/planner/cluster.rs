//! Angular balanced partitioning: a deterministic planner producing the
//! clustered, non-overlapping assignments expected from the mission planner.

use std::cmp::Ordering;

use crate::assignment::Assignment;
use crate::fire_world::{PointId, SurveySet};
use crate::geometry::{centroid, Point};

/// Sorts points by angle around the survey centroid, cuts the circular
/// order into `N` contiguous arcs whose sizes differ by at most one, and
/// hands arcs to UAVs by repeatedly matching the closest (UAV, arc centroid)
/// pair. The sweep starts just after the widest angular gap.
pub fn cluster_plan(uav_positions: &[Point], survey: &SurveySet) -> Assignment {
    let n = uav_positions.len();
    let mut assignment = Assignment::empty(n);
    if n == 0 || survey.is_empty() {
        return assignment;
    }
    let center = centroid(survey.points.iter().map(|p| &p.position)).expect("non-empty survey");
    let mut polar: Vec<(f64, PointId, Point)> = survey
        .points
        .iter()
        .map(|p| ((p.position.y - center.y).atan2(p.position.x - center.x), p.id, p.position))
        .collect();
    polar.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let m = polar.len();
    let mut start = 0;
    let mut widest = -1.0;
    for k in 0..m {
        let next = polar[(k + 1) % m].0 + if k + 1 == m { std::f64::consts::TAU } else { 0.0 };
        let gap = next - polar[k].0;
        if gap > widest {
            widest = gap;
            start = (k + 1) % m;
        }
    }
    polar.rotate_left(start);

    let base = m / n;
    let extra = m % n;
    let mut arcs: Vec<Vec<(PointId, Point)>> = Vec::with_capacity(n);
    let mut cursor = 0;
    for a in 0..n {
        let len = base + usize::from(a < extra);
        arcs.push(polar[cursor..cursor + len].iter().map(|(_, id, p)| (*id, *p)).collect());
        cursor += len;
    }

    let arc_centers: Vec<Option<Point>> = arcs.iter().map(|arc| centroid(arc.iter().map(|(_, p)| p))).collect();
    let mut uav_taken = vec![false; n];
    let mut arc_taken = vec![false; n];
    for _ in 0..n {
        let mut best: Option<(f64, usize, usize)> = None;
        for (u, up) in uav_positions.iter().enumerate().filter(|(u, _)| !uav_taken[*u]) {
            for (a, c) in arc_centers.iter().enumerate().filter(|(a, _)| !arc_taken[*a]) {
                // empty arcs go last
                let d = c.map_or(f64::INFINITY, |c| up.distance(&c));
                let better = match best {
                    None => true,
                    Some((bd, _, _)) => d.total_cmp(&bd) == Ordering::Less,
                };
                if better {
                    best = Some((d, u, a));
                }
            }
        }
        let (_, u, a) = best.expect("an unmatched pair remains");
        uav_taken[u] = true;
        arc_taken[a] = true;
        assignment.lists_mut()[u] = arcs[a].iter().map(|(id, _)| *id).collect();
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::validate_assignment;
    use crate::fire_world::{Cell, SurveyPoint};

    fn survey(points: &[(u32, f64, f64)]) -> SurveySet {
        SurveySet {
            update_index: 0,
            cell_size_m: 450.0,
            points: points
                .iter()
                .map(|(id, x, y)| SurveyPoint {
                    id: PointId(*id),
                    position: Point::new(*x, *y),
                    cell: Cell::new(0, 0),
                })
                .collect(),
        }
    }

    #[test]
    fn compass_points_split_into_adjacent_pairs() {
        // E=0, N=1, W=2, S=3
        let s = survey(&[(0, 100.0, 0.0), (1, 0.0, 100.0), (2, -100.0, 0.0), (3, 0.0, -100.0)]);
        let a = cluster_plan(&[Point::new(0.0, -1000.0), Point::new(0.0, 1000.0)], &s);
        assert!(validate_assignment(&a, &s).is_valid());
        for list in a.lists() {
            assert_eq!(list.len(), 2);
            let (x, y) = (list[0].0, list[1].0);
            assert!((x + 4 - y) % 4 == 1 || (y + 4 - x) % 4 == 1, "{list:?} not adjacent");
        }
    }

    #[test]
    fn single_uav_takes_everything() {
        let s = survey(&[(0, 1.0, 0.0), (5, 0.0, 2.0), (9, 3.0, 3.0)]);
        let a = cluster_plan(&[Point::default()], &s);
        assert_eq!(a.counts(), vec![3]);
        assert!(validate_assignment(&a, &s).is_valid());
    }

    #[test]
    fn more_uavs_than_points() {
        let s = survey(&[(0, 1.0, 0.0), (1, 0.0, 2.0)]);
        let a = cluster_plan(&[Point::default(); 4], &s);
        assert!(validate_assignment(&a, &s).is_valid());
        let mut counts = a.counts();
        counts.sort();
        assert_eq!(counts, vec![0, 0, 1, 1]);
    }
}
