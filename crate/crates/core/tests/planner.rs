mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{completion_body, random_instance, stub_server, survey_of};
use wildfire_swarm::assignment::{greedy_assign, validate_assignment, Assignment, GreedyParams};
use wildfire_swarm::fire_world::SurveySet;
use wildfire_swarm::planner::{
    build_mission_prompt, cluster_plan, plan_with_validation, MissionPlanner, MissionPrompt, PlannerKind,
    PlanningError, RemoteClient, RemoteConfig, RemoteError, Reply, UavDescriptor, CorrectablePrompt,
    DEFAULT_MISSION_COMMAND,
};
use wildfire_swarm::Point;

/// Plays back scripted replies and records every prompt it is shown.
struct Scripted {
    replies: Vec<Reply<Assignment>>,
    seen: Mutex<Vec<String>>,
    calls: AtomicUsize,
}

impl Scripted {
    fn new(replies: Vec<Reply<Assignment>>) -> Arc<Self> {
        Arc::new(Self {
            replies,
            seen: Mutex::new(Vec::new()),
            calls: AtomicUsize::new(0),
        })
    }
}

impl MissionPlanner for Scripted {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn propose(&self, prompt: &MissionPrompt, _: &SurveySet, attempt: usize) -> Result<Reply<Assignment>, PlanningError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.seen.lock().unwrap().push(prompt.render());
        Ok(self.replies[(attempt - 1).min(self.replies.len() - 1)].clone())
    }
}

/// Greedy, but counts how often it is asked.
struct CountingGreedy(AtomicUsize);

impl MissionPlanner for CountingGreedy {
    fn name(&self) -> String {
        "counting-greedy".into()
    }

    fn propose(&self, prompt: &MissionPrompt, survey: &SurveySet, _: usize) -> Result<Reply<Assignment>, PlanningError> {
        self.0.fetch_add(1, Ordering::SeqCst);
        Ok(Reply::Structured(greedy_assign(&prompt.uav_positions(), survey, &GreedyParams::default())))
    }
}

fn descriptors(positions: &[Point]) -> Vec<UavDescriptor> {
    positions
        .iter()
        .enumerate()
        .map(|(id, p)| UavDescriptor {
            id,
            position: *p,
            energy_fraction: 1.0,
        })
        .collect()
}

fn random_reply(r: &mut ChaCha8Rng, survey: &SurveySet, n: usize) -> Reply<Assignment> {
    match r.random_range(0..4) {
        0 => Reply::Text("no idea".into()),
        1 => Reply::Text(format!("{{\"uav_0\": [{}]}}", survey.points[0].id.0)),
        2 => {
            let mut lists = vec![Vec::new(); n];
            for p in &survey.points {
                lists[r.random_range(0..n)].push(p.id);
                if r.random_bool(0.2) {
                    lists[r.random_range(0..n)].push(p.id);
                }
            }
            Reply::Structured(Assignment::from_lists(lists))
        }
        _ => Reply::Structured(cluster_plan(&vec![Point::default(); n], survey)),
    }
}

proptest! {
    #[test]
    fn loop_terminates_safely_and_prompts_grow_by_one_block(seed in any::<u64>(), retries in 0usize..5) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (positions, survey) = random_instance(&mut r, 4, 12);
        let replies = (0..retries + 1).map(|_| random_reply(&mut r, &survey, positions.len())).collect();
        let scripted = Scripted::new(replies);
        let fallback = Arc::new(CountingGreedy(AtomicUsize::new(0)));
        let prompt = build_mission_prompt(DEFAULT_MISSION_COMMAND, descriptors(&positions), &survey);
        let ep = plan_with_validation(
            &PlannerKind::Plugin(scripted.clone()),
            prompt,
            &survey,
            retries,
            &PlannerKind::Plugin(fallback.clone()),
        )
        .unwrap();

        let calls = scripted.calls.load(Ordering::SeqCst);
        prop_assert!(calls <= retries + 1);
        prop_assert_eq!(calls, ep.attempts);
        prop_assert!(fallback.0.load(Ordering::SeqCst) <= 1);
        prop_assert_eq!(ep.fallback_used, fallback.0.load(Ordering::SeqCst) == 1);
        prop_assert!(validate_assignment(&ep.final_assignment, &survey).is_valid());

        let seen = scripted.seen.lock().unwrap();
        let corrections = ep.prompt.corrections();
        for k in 1..seen.len() {
            prop_assert_eq!(&seen[k], &format!("{}\n\n{}", seen[k - 1], corrections[k - 1]));
        }
    }

    #[test]
    fn built_in_planners_are_deterministic(seed in any::<u64>()) {
        let (positions, survey) = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), 4, 12);
        prop_assert_eq!(cluster_plan(&positions, &survey), cluster_plan(&positions, &survey));
        let g = GreedyParams::default();
        prop_assert_eq!(greedy_assign(&positions, &survey, &g), greedy_assign(&positions, &survey, &g));
    }
}

#[test]
fn twelve_points_three_uavs_split_into_contiguous_fours() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<(u32, f64, f64)> =
        (0..12).map(|i| (i, r.random_range(0.0..5000.0), r.random_range(0.0..5000.0))).collect();
    let survey = survey_of(&pts);
    let uavs: Vec<Point> = (0..3).map(|_| Point::new(r.random_range(0.0..5000.0), r.random_range(0.0..5000.0))).collect();
    let plan = cluster_plan(&uavs, &survey);
    assert!(validate_assignment(&plan, &survey).is_valid());
    assert_eq!(plan.counts(), vec![4, 4, 4]);

    // angular order around the centroid, recomputed here
    let (cx, cy) = (
        pts.iter().map(|p| p.1).sum::<f64>() / 12.0,
        pts.iter().map(|p| p.2).sum::<f64>() / 12.0,
    );
    let mut order: Vec<(f64, u32)> = pts.iter().map(|p| ((p.2 - cy).atan2(p.1 - cx), p.0)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ring: Vec<u32> = order.iter().map(|o| o.1).collect();
    for list in plan.lists() {
        let mut slots: Vec<usize> = list.iter().map(|id| ring.iter().position(|x| *x == id.0).unwrap()).collect();
        slots.sort();
        // contiguous on the circle: exactly one gap larger than one slot, or none
        let gaps = slots.windows(2).filter(|w| w[1] - w[0] > 1).count() + usize::from(slots[0] + 12 - slots[3] > 1);
        assert!(gaps <= 1, "list {list:?} is split across the ring at slots {slots:?}");
    }
}

fn stub_config(url: String) -> RemoteConfig {
    RemoteConfig {
        url,
        model: "stub-model".into(),
        backoff_initial_ms: 10,
        backoff_max_ms: 40,
        timeout_s: 5.0,
        ..RemoteConfig::default()
    }
}

#[test]
fn remote_retries_server_errors_with_backoff() {
    let stub = stub_server(vec![
        (500, "oops".into()),
        (500, "oops".into()),
        (200, completion_body("hello there")),
    ]);
    let client = RemoteClient::with_api_key(stub_config(stub.url.clone()), "secret".into()).unwrap();
    let done = client.complete("sys", "user text").unwrap();
    assert_eq!(done.text, "hello there");
    assert_eq!(done.attempts, 3);
    let ms: Vec<u128> = done.backoffs.iter().map(|d| d.as_millis()).collect();
    assert_eq!(ms, vec![10, 20]);

    let log = stub.requests.lock().unwrap();
    assert_eq!(log.len(), 3);
    let body: serde_json::Value = serde_json::from_str(&log[0].0).unwrap();
    assert_eq!(body["model"], "stub-model");
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][1]["content"], "user text");
    assert_eq!(log[0].1, "Bearer secret");
}

#[test]
fn remote_gives_up_after_retry_budget() {
    let stub = stub_server(vec![(503, "busy".into())]);
    let client = RemoteClient::with_api_key(stub_config(stub.url.clone()), "k".into()).unwrap();
    match client.complete("s", "u") {
        Err(RemoteError::Service { status, body_excerpt }) => {
            assert_eq!(status, 503);
            assert_eq!(body_excerpt, "busy");
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(stub.requests.lock().unwrap().len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let stub = stub_server(vec![(401, "bad key".into())]);
    let client = RemoteClient::with_api_key(stub_config(stub.url.clone()), "k".into()).unwrap();
    assert!(matches!(client.complete("s", "u"), Err(RemoteError::Service { status: 401, .. })));
    assert_eq!(stub.requests.lock().unwrap().len(), 1);
}

#[test]
fn remote_planner_text_goes_through_validation() {
    let survey = survey_of(&[(1, 0.0, 0.0), (2, 100.0, 0.0), (5, 200.0, 0.0)]);
    let stub = stub_server(vec![
        (200, completion_body("{\"uav_0\": [1, 2], \"uav_1\": [2]}")),
        (200, completion_body("Sure!\n```json\n{\"uav_0\": [1, 2], \"uav_1\": [5]}\n```")),
    ]);
    std::env::set_var("WILDFIRE_SWARM_PLANNER_TEST_KEY", "t0k3n");
    let cfg = RemoteConfig {
        api_key_env: "WILDFIRE_SWARM_PLANNER_TEST_KEY".into(),
        ..stub_config(stub.url.clone())
    };
    let prompt = build_mission_prompt(DEFAULT_MISSION_COMMAND, descriptors(&[Point::default(); 2]), &survey);
    let ep = plan_with_validation(
        &PlannerKind::Remote(cfg),
        prompt,
        &survey,
        3,
        &PlannerKind::Greedy(GreedyParams::default()),
    )
    .unwrap();
    assert_eq!(ep.attempts, 2);
    assert!(!ep.fallback_used);
    assert_eq!(ep.final_assignment.to_json(), "{\"uav_0\":[1,2],\"uav_1\":[5]}");
    let log = stub.requests.lock().unwrap();
    let second: serde_json::Value = serde_json::from_str(&log[1].0).unwrap();
    let text = second["messages"][1]["content"].as_str().unwrap();
    assert!(text.ends_with(wildfire_swarm::assignment::MISSION_MISSING_CORRECTION));
}
