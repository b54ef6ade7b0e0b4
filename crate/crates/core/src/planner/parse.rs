//! Extraction of structured plans from free-form planner text.

use serde_json::Value;
use thiserror::Error;

use crate::assignment::Assignment;
use crate::fire_world::{PointId, SurveySet};
use crate::geometry::Point;
use crate::routing::Route;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("no assignment mapping found in planner output")]
    NoMapping,
    #[error("no route list found in planner output")]
    NoRoute,
}

/// JSON values that start at each `open` byte of `text`, in order.
fn json_candidates(text: &str, open: u8) -> impl Iterator<Item = Value> + '_ {
    text.bytes()
        .enumerate()
        .filter(move |(_, b)| *b == open)
        .filter_map(move |(i, _)| {
            serde_json::Deserializer::from_str(&text[i..])
                .into_iter::<Value>()
                .next()
                .and_then(Result::ok)
        })
}

fn id_list(v: &Value) -> Option<Vec<PointId>> {
    v.as_array()?
        .iter()
        .map(|x| x.as_u64().and_then(|n| u32::try_from(n).ok()).map(PointId))
        .collect()
}

fn mapping(v: &Value, uav_count: usize) -> Option<Assignment> {
    let obj = v.as_object()?;
    if obj.is_empty() {
        return None;
    }
    let mut a = Assignment::empty(uav_count);
    for (key, list) in obj {
        let k: usize = key.strip_prefix("uav_")?.parse().ok()?;
        if k >= uav_count {
            return None;
        }
        a.lists_mut()[k].extend(id_list(list)?);
    }
    Some(a)
}

/// Finds the first well-formed `{"uav_<k>": [ids...]}` object in `text`,
/// fenced or embedded in prose. Ids absent from `survey` are kept so that
/// validation can flag them.
pub fn parse_assignment(text: &str, _survey: &SurveySet, uav_count: usize) -> Result<Assignment, ParseError> {
    json_candidates(text, b'{')
        .find_map(|v| mapping(&v, uav_count))
        .ok_or(ParseError::NoMapping)
}

/// Finds the first JSON array of non-negative integer ids in `text`.
pub fn parse_route(text: &str, uav_index: usize, start: Point) -> Result<Route, ParseError> {
    json_candidates(text, b'[')
        .find_map(|v| id_list(&v))
        .map(|ids| Route::new(uav_index, start, ids))
        .ok_or(ParseError::NoRoute)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn survey() -> SurveySet {
        SurveySet {
            update_index: 0,
            cell_size_m: 450.0,
            points: vec![],
        }
    }

    fn expected() -> Assignment {
        Assignment::from_lists(vec![vec![PointId(1), PointId(2)], vec![PointId(3)]])
    }

    #[test]
    fn fenced_block() {
        let text = "```json\n{\"uav_0\":[1,2],\"uav_1\":[3]}\n```";
        assert_eq!(parse_assignment(text, &survey(), 2).unwrap(), expected());
    }

    #[test]
    fn embedded_in_prose() {
        let block = r#"{"uav_0":[1,2],"uav_1":[3]}"#;
        let wrappers = [
            "Here is the plan: {B}",
            "{B}\nThis balances workload.",
            "Sure!\n```\n{B}\n```\nLet me know.",
            "```json\n{B}\n```",
            "Plan (json): {B}.",
            "Note {not json} then {B}",
            "The assignment {\"reasoning\": \"cluster\"} is {B}",
            "Considering distance, workload and overlap, I propose:\n\n{B}\n\nEach UAV covers one cluster.",
            "   {B}   ",
            "{\"uav_0\": \"oops\"} retry: {B}",
        ];
        for w in wrappers {
            let text = w.replace("{B}", block);
            assert_eq!(parse_assignment(&text, &survey(), 2).unwrap(), expected(), "{text}");
        }
    }

    #[test]
    fn unknown_ids_survive_parsing() {
        let a = parse_assignment(r#"{"uav_0":[1,999]}"#, &survey(), 2).unwrap();
        assert_eq!(a.lists(), &[vec![PointId(1), PointId(999)], vec![]]);
    }

    #[test]
    fn refusals_and_bad_blocks_fail() {
        assert_eq!(parse_assignment("I cannot help with that.", &survey(), 2), Err(ParseError::NoMapping));
        assert_eq!(parse_assignment(r#"{"uav_5":[1]}"#, &survey(), 2), Err(ParseError::NoMapping));
        assert_eq!(parse_assignment(r#"{"uav_0":[-1]}"#, &survey(), 2), Err(ParseError::NoMapping));
    }

    #[test]
    fn route_lists() {
        let r = parse_route("Route: [2,1,3]", 4, Point::default()).unwrap();
        assert_eq!(r.waypoints, vec![PointId(2), PointId(1), PointId(3)]);
        assert_eq!(r.uav_index, 4);
        assert_eq!(parse_route("no idea", 0, Point::default()), Err(ParseError::NoRoute));
    }
}
