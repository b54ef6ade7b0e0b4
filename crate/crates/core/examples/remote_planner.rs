//! Drives the validation loop against a chat-completion endpoint. A tiny
//! local server stands in for the hosted model: its first answer invents a
//! survey point, and once the correction shows up in the prompt it answers
//! with a proper round-robin split.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use serde_json::{json, Value};

use wildfire_swarm::assignment::{GreedyParams, MISSION_EXTRA_CORRECTION};
use wildfire_swarm::fire_world::{generate_survey_points, SyntheticFire};
use wildfire_swarm::planner::{
    build_mission_prompt, plan_with_validation, PlannerKind, RemoteConfig, UavDescriptor, DEFAULT_MISSION_COMMAND,
};
use wildfire_swarm::Point;

const KEY_VAR: &str = "WILDFIRE_SWARM_EXAMPLE_KEY";

fn answer(prompt: &str) -> String {
    let uavs = prompt.lines().filter(|l| l.starts_with("uav_")).count().max(1);
    let ids: Vec<u64> = prompt
        .lines()
        .filter_map(|l| l.strip_prefix("point "))
        .filter_map(|l| l.split_whitespace().next()?.parse().ok())
        .collect();
    let mut lists = vec![Vec::new(); uavs];
    for (i, id) in ids.iter().enumerate() {
        lists[i % uavs].push(*id);
    }
    if !prompt.contains(MISSION_EXTRA_CORRECTION) {
        lists[0].push(999_999);
    }
    let mapping: serde_json::Map<String, Value> =
        lists.into_iter().enumerate().map(|(k, l)| (format!("uav_{k}"), json!(l))).collect();
    format!("Here is the plan:\n```json\n{}\n```", Value::Object(mapping))
}

/// Serves `requests` chat completions on an ephemeral port.
fn spawn_stub(requests: usize) -> std::io::Result<String> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let url = format!("http://{}/v1/chat/completions", listener.local_addr()?);
    thread::spawn(move || {
        for stream in listener.incoming().take(requests).flatten() {
            let mut reader = BufReader::new(stream);
            let mut len = 0;
            let mut line = String::new();
            while reader.read_line(&mut line).is_ok_and(|n| n > 0) && line != "\r\n" {
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap_or(0);
                }
                line.clear();
            }
            let mut body = vec![0; len];
            if reader.read_exact(&mut body).is_err() {
                continue;
            }
            let request: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
            let prompt = request.pointer("/messages/1/content").and_then(Value::as_str).unwrap_or("");
            let reply = json!({"choices": [{"message": {"role": "assistant", "content": answer(prompt)}}]}).to_string();
            let mut stream = reader.into_inner();
            let _ = write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                reply.len()
            );
        }
    });
    Ok(url)
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let url = spawn_stub(2)?;
    std::env::set_var(KEY_VAR, "example-token");
    let planner = PlannerKind::Remote(RemoteConfig {
        url,
        model: "stub".into(),
        api_key_env: KEY_VAR.into(),
        timeout_s: 5.0,
        ..RemoteConfig::default()
    });

    let mask = SyntheticFire::eaton_scale().initial_mask(1);
    let survey = generate_survey_points(&mask, 450.0);
    let uavs = (0..3)
        .map(|id| UavDescriptor {
            id,
            position: Point::new(9000.0, 4500.0),
            energy_fraction: 1.0,
        })
        .collect();
    let prompt = build_mission_prompt(DEFAULT_MISSION_COMMAND, uavs, &survey);
    let episode = plan_with_validation(&planner, prompt, &survey, 3, &PlannerKind::Greedy(GreedyParams::default()))?;

    println!("{} survey points, {} attempts", survey.len(), episode.attempts);
    for (i, o) in episode.outcomes.iter().enumerate() {
        println!("attempt {}: valid = {}", i + 1, o.is_valid());
    }
    println!("points per UAV: {:?}", episode.final_assignment.counts());
    assert_eq!(episode.attempts, 2);
    assert!(!episode.fallback_used);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
