//! Reference implementations and generators shared by the integration
//! tests. These are written from the definitions, not from the library code.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wildfire_swarm::fire_world::{Cell, FireMask, PointId, SurveyPoint, SurveySet};
use wildfire_swarm::Point;

pub fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

pub fn survey_of(points: &[(u32, f64, f64)]) -> SurveySet {
    SurveySet {
        update_index: 0,
        cell_size_m: 450.0,
        points: points
            .iter()
            .map(|&(id, x, y)| SurveyPoint {
                id: PointId(id),
                position: Point::new(x, y),
                cell: Cell::new(id as usize, 0),
            })
            .collect(),
    }
}

/// Random instance with distinct, shuffled, non-contiguous ids.
pub fn random_instance(rng: &mut ChaCha8Rng, max_uavs: usize, max_points: usize) -> (Vec<Point>, SurveySet) {
    let n = rng.random_range(1..=max_uavs);
    let m = rng.random_range(1..=max_points);
    let uavs = (0..n)
        .map(|_| Point::new(rng.random_range(0.0..5000.0), rng.random_range(0.0..5000.0)))
        .collect();
    let mut ids: Vec<u32> = (0..m as u32).map(|k| k * 3 + rng.random_range(0..3)).collect();
    for i in (1..ids.len()).rev() {
        let j = rng.random_range(0..=i);
        ids.swap(i, j);
    }
    let pts: Vec<(u32, f64, f64)> = ids
        .into_iter()
        .map(|id| (id, rng.random_range(0.0..5000.0), rng.random_range(0.0..5000.0)))
        .collect();
    (uavs, survey_of(&pts))
}

/// Re-evaluates the assignment cost of every (UAV, point) pair at every
/// step and takes the lexicographic minimum of (cost, UAV index, point id).
pub fn greedy_oracle(uavs: &[Point], survey: &SurveySet, lambda: f64, b: f64) -> Vec<Vec<u32>> {
    let n = uavs.len();
    let mut pos: Vec<(f64, f64)> = uavs.iter().map(|p| (p.x, p.y)).collect();
    let mut left: Vec<(u32, (f64, f64))> =
        survey.points.iter().map(|p| (p.id.0, (p.position.x, p.position.y))).collect();
    let mut lists = vec![Vec::new(); n];
    while !left.is_empty() {
        let total: usize = lists.iter().map(Vec::len).sum();
        let mean = total as f64 / n as f64;
        let mut cands = Vec::new();
        for i in 0..n {
            let over = lists[i].len() as f64 - mean;
            let pen = if over > 0.0 { over * b } else { 0.0 };
            for &(id, p) in &left {
                cands.push((dist(pos[i], p) + lambda * pen, i, id, p));
            }
        }
        let best = cands
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)))
            .unwrap();
        lists[best.1].push(best.2);
        pos[best.1] = best.3;
        left.retain(|(id, _)| *id != best.2);
    }
    lists
}

/// Cells that burn and touch a non-burning 4-neighbour or the grid edge.
pub fn boundary_oracle(mask: &FireMask) -> BTreeSet<(usize, usize)> {
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let burning = |c: isize, r: isize| {
        c >= 0 && r >= 0 && c < w && r < h && mask.is_burning(Cell::new(c as usize, r as usize))
    };
    let mut out = BTreeSet::new();
    for r in 0..h {
        for c in 0..w {
            if burning(c, r)
                && [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dc, dr)| !burning(c + dc, r + dr))
            {
                out.insert((c as usize, r as usize));
            }
        }
    }
    out
}

pub fn random_mask(rng: &mut ChaCha8Rng, max_side: usize) -> FireMask {
    let w = rng.random_range(1..=max_side);
    let h = rng.random_range(1..=max_side);
    let density = rng.random_range(0.0..1.0);
    let mut m = FireMask::new(w, h, 100.0, Point::new(0.0, 0.0)).unwrap();
    for r in 0..h {
        for c in 0..w {
            if rng.random_bool(density) {
                m.set(Cell::new(c, r), true);
            }
        }
    }
    m
}

pub fn path_length(start: (f64, f64), order: &[(f64, f64)]) -> f64 {
    let mut cur = start;
    let mut total = 0.0;
    for &p in order {
        total += dist(cur, p);
        cur = p;
    }
    total
}

/// Shortest open path from `start` through every point, by enumerating all
/// permutations (Heap's algorithm).
pub fn exhaustive_optimum(start: (f64, f64), pts: &[(f64, f64)]) -> f64 {
    let mut a = pts.to_vec();
    let n = a.len();
    let mut best = path_length(start, &a);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            best = best.min(path_length(start, &a));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimal HTTP endpoint answering each request with the next scripted
/// (status, body) pair; the last entry repeats. Records request bodies and
/// authorization headers.
pub struct StubServer {
    pub url: String,
    pub requests: Arc<Mutex<Vec<(String, String)>>>,
}

pub fn stub_server(script: Vec<(u16, String)>) -> StubServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let log = requests.clone();
    thread::spawn(move || {
        for (n, stream) in listener.incoming().enumerate() {
            let Ok(stream) = stream else { continue };
            let mut reader = BufReader::new(stream);
            let mut len = 0;
            let mut auth = String::new();
            let mut line = String::new();
            while reader.read_line(&mut line).is_ok_and(|k| k > 0) && line != "\r\n" {
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap_or(0);
                }
                if lower.starts_with("authorization:") {
                    auth = line["authorization:".len()..].trim().to_string();
                }
                line.clear();
            }
            let mut body = vec![0; len];
            let _ = reader.read_exact(&mut body);
            log.lock().unwrap().push((String::from_utf8_lossy(&body).into_owned(), auth));
            let (status, reply) = script[n.min(script.len() - 1)].clone();
            let mut stream = reader.into_inner();
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                reply.len()
            );
        }
    });
    StubServer { url, requests }
}

pub fn completion_body(content: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string()
}
