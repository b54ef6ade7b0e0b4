//! Static SVG snapshots of a run's frame stream.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::sim::{Frame, PlanRecord, StreamRecord, UavStatus};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("no frame records in input")]
    Empty,
    #[error("no frame matches update index {0}")]
    NoSuchUpdate(usize),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RenderOptions {
    /// Restrict to frames of this update index.
    pub update_index: Option<usize>,
    /// Pick the first frame at or after this time; the last frame otherwise.
    pub at_s: Option<f64>,
}

pub fn parse_stream(text: &str) -> Result<Vec<StreamRecord>, RenderError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| RenderError::Malformed {
            line: n + 1,
            reason: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Chooses a frame and the plan in force at that frame.
pub fn select(records: &[StreamRecord], opts: &RenderOptions) -> Result<(Frame, Option<PlanRecord>), RenderError> {
    let mut plan: Option<&PlanRecord> = None;
    let mut chosen: Option<(&Frame, Option<&PlanRecord>)> = None;
    let mut any_frame = false;
    for r in records {
        match r {
            StreamRecord::Plan(p) => plan = Some(p),
            StreamRecord::Frame(f) => {
                any_frame = true;
                if opts.update_index.is_some_and(|u| u != f.update_index) {
                    continue;
                }
                let reached = opts.at_s.is_some_and(|at| f.t_s >= at - 1e-9);
                chosen = Some((f, plan));
                if reached {
                    break;
                }
            }
        }
    }
    match chosen {
        Some((f, p)) => Ok((f.clone(), p.cloned())),
        None if !any_frame => Err(RenderError::Empty),
        None => Err(RenderError::NoSuchUpdate(opts.update_index.unwrap_or_default())),
    }
}

fn color(k: usize, n: usize) -> String {
    let hue = (k * 360) / n.max(1);
    format!("hsl({hue},70%,42%)")
}

struct View {
    min_x: f64,
    max_y: f64,
    scale: f64,
}

impl View {
    fn x(&self, x: f64) -> f64 {
        (x - self.min_x) * self.scale
    }
    fn y(&self, y: f64) -> f64 {
        (self.max_y - y) * self.scale
    }
}

/// Renders one frame as a self-contained SVG document.
pub fn render_svg(frame: &Frame, plan: Option<&PlanRecord>) -> String {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for u in &frame.uavs {
        xs.push(u.x_m);
        ys.push(u.y_m);
    }
    if let Some(p) = plan {
        xs.push(p.launch_x_m);
        ys.push(p.launch_y_m);
        for s in &p.survey {
            xs.push(s.x_m);
            ys.push(s.y_m);
        }
        for seg in &p.fire_outline {
            xs.extend([seg[0], seg[2]]);
            ys.extend([seg[1], seg[3]]);
        }
    }
    let lo = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 500.0;
    let (min_x, max_x, min_y, max_y) = (lo(&xs) - pad, hi(&xs) + pad, lo(&ys) - pad, hi(&ys) + pad);
    let span = (max_x - min_x).max(max_y - min_y).max(1.0);
    let view = View {
        min_x,
        max_y,
        scale: 1000.0 / span,
    };
    let w = (max_x - min_x) * view.scale;
    let h = (max_y - min_y) * view.scale + 30.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    if let Some(p) = plan {
        if !p.fire_outline.is_empty() {
            let mut d = String::new();
            for seg in &p.fire_outline {
                let _ = write!(
                    d,
                    "M{:.1} {:.1}L{:.1} {:.1}",
                    view.x(seg[0]),
                    view.y(seg[1]),
                    view.x(seg[2]),
                    view.y(seg[3])
                );
            }
            let _ = writeln!(s, r#"<path class="fire-outline" d="{d}" fill="none" stroke="rgb(214,47,31)" stroke-width="1.5"/>"#);
        }

        let n = p.assignment.uav_count();
        let pos = |id| p.survey.iter().find(|q| q.id == id).map(|q| (q.x_m, q.y_m));
        for (k, ids) in p.assignment.lists().iter().enumerate() {
            let uav = p.assignment_uavs.get(k).copied().unwrap_or(k);
            let _ = writeln!(s, r#"<g class="uav-points" data-uav="{uav}" fill="{}">"#, color(k, n));
            for (x, y) in ids.iter().filter_map(|id| pos(*id)) {
                let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="4"/>"#, view.x(x), view.y(y));
            }
            let _ = writeln!(s, "</g>");
        }
        for r in p.routes.iter().filter(|r| !r.waypoints.is_empty()) {
            let k = p.assignment_uavs.iter().position(|u| *u == r.uav).unwrap_or(r.uav);
            let mut pts = format!("{:.1},{:.1}", view.x(r.start_x_m), view.y(r.start_y_m));
            for (x, y) in r.waypoints.iter().filter_map(|id| pos(*id)) {
                let _ = write!(pts, " {:.1},{:.1}", view.x(x), view.y(y));
            }
            let _ = writeln!(
                s,
                r#"<polyline class="route" data-uav="{}" points="{pts}" fill="none" stroke="{}" stroke-width="1.2" stroke-opacity="0.8"/>"#,
                r.uav,
                color(k, n)
            );
        }
        let (ex, ey) = (view.x(p.launch_x_m), view.y(p.launch_y_m));
        let _ = writeln!(
            s,
            r#"<g class="egs"><rect x="{:.1}" y="{:.1}" width="14" height="14" fill="black"/><text x="{:.1}" y="{:.1}" font-size="12" font-family="sans-serif">EGS</text></g>"#,
            ex - 7.0,
            ey - 7.0,
            ex + 10.0,
            ey + 4.0
        );
    }

    for u in &frame.uavs {
        let (x, y) = (view.x(u.x_m), view.y(u.y_m));
        let fill = if u.status == UavStatus::Depleted { "gray" } else { "black" };
        let _ = writeln!(
            s,
            r#"<path class="uav" data-uav="{}" d="M{:.1} {:.1}L{:.1} {:.1}L{:.1} {:.1}Z" fill="{fill}" stroke="white" stroke-width="0.8"/>"#,
            u.index,
            x,
            y - 8.0,
            x - 6.0,
            y + 5.0,
            x + 6.0,
            y + 5.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="8" y="{:.1}" font-size="14" font-family="sans-serif">update {} | t = {:.0} s | visited {}/{}</text>"#,
        h - 10.0,
        frame.update_index,
        frame.t_s,
        frame.visited_count,
        frame.survey_total
    );
    s.push_str("</svg>\n");
    s
}

/// Reads a frame stream and writes the selected snapshot to `out_svg`.
pub fn render_file(frames: &Path, out_svg: &Path, opts: &RenderOptions) -> Result<(), RenderError> {
    let io = |p: &Path, e: std::io::Error| RenderError::Io {
        path: p.display().to_string(),
        reason: e.to_string(),
    };
    let text = std::fs::read_to_string(frames).map_err(|e| io(frames, e))?;
    let records = parse_stream(&text)?;
    let (frame, plan) = select(&records, opts)?;
    std::fs::write(out_svg, render_svg(&frame, plan.as_ref())).map_err(|e| io(out_svg, e))
}
