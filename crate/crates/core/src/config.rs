//! Scenario files.
//!
//! A scenario is a TOML document whose keys are addressed by their dotted
//! path (`uav.count`, `fire.spread_probability`, ...). Tables and dotted
//! keys are interchangeable. Loading flattens the document, applies
//! `key=value` overrides, fills defaults and checks every key, collecting all
//! problems instead of stopping at the first.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;
use toml::Value;

use crate::assignment::GreedyParams;
use crate::fire_world::{load_mask, FireScenario, FireSpreadParams, Neighborhood, SyntheticFire};
use crate::geometry::Point;
use crate::planner::{PlannerKind, RemoteConfig, RoutePlannerKind};
use crate::sim::{ConfigIssue, Mode, PowerModel, ScenarioConfig};

#[derive(Debug, Error)]
#[error("{}", .issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl ConfigError {
    fn single(key: &str, message: impl Into<String>) -> Self {
        Self {
            issues: vec![ConfigIssue::new(key, message)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Int,
    Float,
    Str,
    /// Array of `[x, y]` pairs.
    Points,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Int => "integer",
            Kind::Float => "number",
            Kind::Str => "string",
            Kind::Points => "array of [x, y] pairs",
        }
    }
}

const KEYS: &[(&str, Kind)] = &[
    ("uav.count", Kind::Int),
    ("uav.speed_mps", Kind::Float),
    ("uav.detection_range_m", Kind::Float),
    ("uav.battery_mah", Kind::Float),
    ("uav.battery_voltage_v", Kind::Float),
    ("uav.launch_x_m", Kind::Float),
    ("uav.launch_y_m", Kind::Float),
    ("power.base_w", Kind::Float),
    ("power.flight_per_mps_w", Kind::Float),
    ("power.llm_idle_w", Kind::Float),
    ("power.llm_infer_w", Kind::Float),
    ("mission.mode", Kind::Str),
    ("mission.seed", Kind::Int),
    ("mission.command", Kind::Str),
    ("mission.cell_size_m", Kind::Float),
    ("mission.update_interval_s", Kind::Float),
    ("mission.dwell_s", Kind::Float),
    ("mission.inference_latency_s", Kind::Float),
    ("mission.dt_s", Kind::Float),
    ("mission.max_time_s", Kind::Float),
    ("mission.max_retries", Kind::Int),
    ("mission.survivors", Kind::Points),
    ("planner.kind", Kind::Str),
    ("planner.url", Kind::Str),
    ("planner.model", Kind::Str),
    ("planner.timeout_s", Kind::Float),
    ("planner.max_transport_retries", Kind::Int),
    ("planner.temperature", Kind::Float),
    ("planner.api_key_env", Kind::Str),
    ("planner.backoff_initial_ms", Kind::Int),
    ("planner.backoff_max_ms", Kind::Int),
    ("route.kind", Kind::Str),
    ("route.max_passes", Kind::Int),
    ("greedy.lambda", Kind::Float),
    ("greedy.b", Kind::Float),
    ("fire.mask_file", Kind::Str),
    ("fire.width_cells", Kind::Int),
    ("fire.height_cells", Kind::Int),
    ("fire.resolution_m", Kind::Float),
    ("fire.center_x_m", Kind::Float),
    ("fire.center_y_m", Kind::Float),
    ("fire.radius_m", Kind::Float),
    ("fire.roughen_steps", Kind::Int),
    ("fire.roughen_probability", Kind::Float),
    ("fire.spread_probability", Kind::Float),
    ("fire.neighborhood", Kind::Int),
    ("fire.steps_per_update", Kind::Int),
    ("fire.updates", Kind::Int),
    ("output.frame_interval_s", Kind::Float),
];

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

fn defaults() -> BTreeMap<String, Value> {
    let proto = ScenarioConfig::eaton(1, 0);
    let synthetic = SyntheticFire::eaton_scale();
    let remote = RemoteConfig::default();
    let f = |v: f64| Value::Float(v);
    let i = |v: i64| Value::Integer(v);
    let s = |v: &str| Value::String(v.to_string());
    let spread = proto.fire.spread;
    let entries = [
        ("uav.speed_mps", f(proto.cruise_speed_mps)),
        ("uav.detection_range_m", f(proto.detection_range_m)),
        ("uav.battery_mah", f(proto.battery_capacity_mah)),
        ("uav.battery_voltage_v", f(proto.battery_voltage_v)),
        ("power.base_w", f(proto.power.base_w)),
        ("power.flight_per_mps_w", f(proto.power.flight_per_mps_w)),
        ("power.llm_idle_w", f(proto.power.llm_idle_w)),
        ("power.llm_infer_w", f(proto.power.llm_infer_w)),
        ("mission.mode", s(proto.mode.as_str())),
        ("mission.seed", i(0)),
        ("mission.command", s(&proto.mission_command)),
        ("mission.cell_size_m", f(proto.cell_size_m)),
        ("mission.update_interval_s", f(proto.update_interval_s)),
        ("mission.dwell_s", f(proto.dwell_time_s)),
        ("mission.inference_latency_s", f(proto.inference_latency_s)),
        ("mission.dt_s", f(proto.dt_s)),
        ("mission.max_time_s", f(proto.max_mission_time_s)),
        ("mission.max_retries", i(proto.max_retries as i64)),
        ("mission.survivors", Value::Array(Vec::new())),
        ("planner.kind", s("cluster")),
        ("planner.url", s(&remote.url)),
        ("planner.model", s(&remote.model)),
        ("planner.timeout_s", f(remote.timeout_s)),
        ("planner.max_transport_retries", i(remote.max_transport_retries as i64)),
        ("planner.temperature", f(remote.temperature)),
        ("planner.api_key_env", s(&remote.api_key_env)),
        ("planner.backoff_initial_ms", i(remote.backoff_initial_ms as i64)),
        ("planner.backoff_max_ms", i(remote.backoff_max_ms as i64)),
        ("route.kind", s("nearest_two_opt")),
        ("route.max_passes", i(proto.max_passes as i64)),
        ("greedy.lambda", f(proto.greedy.lambda)),
        ("greedy.b", f(proto.greedy.penalty_coefficient)),
        ("fire.width_cells", i(synthetic.width_cells as i64)),
        ("fire.height_cells", i(synthetic.height_cells as i64)),
        ("fire.resolution_m", f(synthetic.resolution_m)),
        ("fire.center_x_m", f(synthetic.center.x)),
        ("fire.center_y_m", f(synthetic.center.y)),
        ("fire.radius_m", f(synthetic.radius_m)),
        ("fire.roughen_steps", i(synthetic.roughen_steps as i64)),
        ("fire.roughen_probability", f(synthetic.roughen_probability)),
        ("fire.spread_probability", f(spread.ignition_probability)),
        (
            "fire.neighborhood",
            i(match spread.neighborhood {
                Neighborhood::Four => 4,
                Neighborhood::Eight => 8,
            }),
        ),
        ("fire.steps_per_update", i(spread.steps_per_update as i64)),
        ("fire.updates", i(proto.fire.updates as i64)),
        ("output.frame_interval_s", f(proto.frame_interval_s)),
    ];
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Parses the value half of a `key=value` override as TOML, falling back to
/// a bare string so `planner.kind=greedy` works unquoted.
pub fn parse_override(text: &str) -> Result<(String, Value), ConfigIssue> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| ConfigIssue::new(text, "override must have the form key=value"))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key, value))
}

/// Every key with its final value, defaults materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    values: BTreeMap<String, Value>,
}

impl ResolvedConfig {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn values(&self) -> &BTreeMap<String, Value> {
        &self.values
    }

    /// Replaces one key and re-checks the result.
    pub fn with(&self, key: &str, value: Value) -> Result<Self, ConfigError> {
        let mut values = self.values.clone();
        values.insert(key.to_string(), value);
        Self::check(values)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.values).expect("toml values are representable as json")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, ConfigError> {
        let values: BTreeMap<String, Value> =
            serde_json::from_value(value.clone()).map_err(|e| ConfigError::single("config", e.to_string()))?;
        Self::check(values)
    }

    fn check(mut values: BTreeMap<String, Value>) -> Result<Self, ConfigError> {
        let mut issues = Vec::new();
        if !values.contains_key("uav.count") {
            issues.push(ConfigIssue::new("uav.count", "required"));
        }
        for (key, value) in values.iter_mut() {
            match kind_of(key) {
                None => issues.push(ConfigIssue::new(key.as_str(), "unknown key")),
                Some(kind) => {
                    if let Err(msg) = coerce(kind, value) {
                        issues.push(ConfigIssue::new(key.as_str(), msg));
                    }
                }
            }
        }
        if !issues.is_empty() {
            return Err(ConfigError { issues });
        }
        for (k, v) in defaults() {
            values.entry(k).or_insert(v);
        }
        Ok(Self { values })
    }

    fn float(&self, key: &str) -> f64 {
        match self.values.get(key) {
            Some(Value::Float(f)) => *f,
            Some(Value::Integer(i)) => *i as f64,
            _ => f64::NAN,
        }
    }

    fn int(&self, key: &str) -> i64 {
        match self.values.get(key) {
            Some(Value::Integer(i)) => *i,
            _ => 0,
        }
    }

    fn str(&self, key: &str) -> &str {
        match self.values.get(key) {
            Some(Value::String(s)) => s,
            _ => "",
        }
    }

    fn remote(&self) -> RemoteConfig {
        RemoteConfig {
            url: self.str("planner.url").to_string(),
            model: self.str("planner.model").to_string(),
            timeout_s: self.float("planner.timeout_s"),
            max_transport_retries: self.int("planner.max_transport_retries") as u32,
            temperature: self.float("planner.temperature"),
            api_key_env: self.str("planner.api_key_env").to_string(),
            backoff_initial_ms: self.int("planner.backoff_initial_ms") as u64,
            backoff_max_ms: self.int("planner.backoff_max_ms") as u64,
        }
    }

    /// Builds the simulation input, loading the mask file if one is set.
    pub fn to_scenario(&self) -> Result<ScenarioConfig, ConfigError> {
        let mut issues = Vec::new();
        let mut count = |key: &str| -> usize {
            let v = self.int(key);
            if v < 0 {
                issues.push(ConfigIssue::new(key, format!("must be >= 0, got {v}")));
            }
            v.max(0) as usize
        };
        let uav_count = count("uav.count");
        let max_retries = count("mission.max_retries");
        let max_passes = count("route.max_passes");
        let width = count("fire.width_cells");
        let height = count("fire.height_cells");
        let roughen_steps = count("fire.roughen_steps");
        let steps_per_update = count("fire.steps_per_update");
        let updates = count("fire.updates");
        let _ = count("planner.max_transport_retries");
        let _ = count("planner.backoff_initial_ms");
        let _ = count("planner.backoff_max_ms");
        let seed_raw = self.int("mission.seed");
        if seed_raw < 0 {
            issues.push(ConfigIssue::new("mission.seed", "must be >= 0"));
        }
        let seed = seed_raw.max(0) as u64;

        let neighborhood = match self.int("fire.neighborhood") {
            4 => Neighborhood::Four,
            8 => Neighborhood::Eight,
            other => {
                issues.push(ConfigIssue::new("fire.neighborhood", format!("must be 4 or 8, got {other}")));
                Neighborhood::Eight
            }
        };
        let mode = match self.str("mission.mode") {
            "snapshot" => Mode::Snapshot,
            "dynamic" => Mode::Dynamic,
            other => {
                issues.push(ConfigIssue::new(
                    "mission.mode",
                    format!("must be snapshot or dynamic, got {other:?}"),
                ));
                Mode::Snapshot
            }
        };
        let remote = self.remote();
        if !(remote.timeout_s > 0.0) {
            issues.push(ConfigIssue::new("planner.timeout_s", "must be > 0"));
        }
        let greedy = GreedyParams {
            lambda: self.float("greedy.lambda"),
            penalty_coefficient: self.float("greedy.b"),
        };
        let planner = match self.str("planner.kind") {
            "greedy" => PlannerKind::Greedy(greedy),
            "cluster" => PlannerKind::Cluster,
            "remote" => PlannerKind::Remote(remote.clone()),
            other => {
                issues.push(ConfigIssue::new(
                    "planner.kind",
                    format!("must be greedy, cluster or remote, got {other:?}"),
                ));
                PlannerKind::Cluster
            }
        };
        let route_planner = match self.str("route.kind") {
            "nearest_two_opt" => RoutePlannerKind::NearestTwoOpt { max_passes },
            "remote" => RoutePlannerKind::Remote(remote),
            other => {
                issues.push(ConfigIssue::new(
                    "route.kind",
                    format!("must be nearest_two_opt or remote, got {other:?}"),
                ));
                RoutePlannerKind::default()
            }
        };

        let synthetic = SyntheticFire {
            width_cells: width,
            height_cells: height,
            resolution_m: self.float("fire.resolution_m"),
            center: Point::new(self.float("fire.center_x_m"), self.float("fire.center_y_m")),
            radius_m: self.float("fire.radius_m"),
            roughen_steps: roughen_steps as u32,
            roughen_probability: self.float("fire.roughen_probability"),
        };
        let initial = match self.values.get("fire.mask_file") {
            Some(Value::String(path)) => match load_mask(Path::new(path)) {
                Ok(m) => Some(m),
                Err(e) => {
                    issues.push(ConfigIssue::new("fire.mask_file", e.to_string()));
                    None
                }
            },
            _ => {
                let mut ok = true;
                for key in ["fire.resolution_m", "fire.radius_m"] {
                    if !(self.float(key) > 0.0) {
                        issues.push(ConfigIssue::new(key, "must be > 0"));
                        ok = false;
                    }
                }
                if width == 0 || height == 0 {
                    issues.push(ConfigIssue::new("fire.width_cells", "grid must be at least 1x1"));
                    ok = false;
                }
                let p = synthetic.roughen_probability;
                if !(0.0..=1.0).contains(&p) {
                    issues.push(ConfigIssue::new("fire.roughen_probability", "must be in [0, 1]"));
                    ok = false;
                }
                ok.then(|| synthetic.initial_mask(seed))
            }
        };
        let launch = match (self.values.get("uav.launch_x_m"), self.values.get("uav.launch_y_m")) {
            (Some(_), Some(_)) => Point::new(self.float("uav.launch_x_m"), self.float("uav.launch_y_m")),
            (None, None) => match (&initial, self.values.contains_key("fire.mask_file")) {
                (Some(mask), true) => launch_below(mask),
                _ => crate::sim::default_launch(&synthetic),
            },
            _ => {
                issues.push(ConfigIssue::new("uav.launch_x_m", "launch_x_m and launch_y_m must be given together"));
                Point::default()
            }
        };
        let survivors = match self.values.get("mission.survivors") {
            Some(Value::Array(items)) => items.iter().filter_map(as_pair).map(|(x, y)| Point::new(x, y)).collect(),
            _ => Vec::new(),
        };

        let Some(initial) = initial else {
            return Err(ConfigError { issues });
        };
        let fire = FireScenario {
            initial,
            spread: FireSpreadParams {
                ignition_probability: self.float("fire.spread_probability"),
                neighborhood,
                steps_per_update: steps_per_update as u32,
            },
            updates,
        };
        let mut c = ScenarioConfig::new(uav_count, launch, fire);
        c.cruise_speed_mps = self.float("uav.speed_mps");
        c.detection_range_m = self.float("uav.detection_range_m");
        c.battery_capacity_mah = self.float("uav.battery_mah");
        c.battery_voltage_v = self.float("uav.battery_voltage_v");
        c.power = PowerModel {
            base_w: self.float("power.base_w"),
            flight_per_mps_w: self.float("power.flight_per_mps_w"),
            llm_idle_w: self.float("power.llm_idle_w"),
            llm_infer_w: self.float("power.llm_infer_w"),
        };
        c.mode = mode;
        c.seed = seed;
        c.mission_command = self.str("mission.command").to_string();
        c.cell_size_m = self.float("mission.cell_size_m");
        c.update_interval_s = self.float("mission.update_interval_s");
        c.dwell_time_s = self.float("mission.dwell_s");
        c.inference_latency_s = self.float("mission.inference_latency_s");
        c.dt_s = self.float("mission.dt_s");
        c.max_mission_time_s = self.float("mission.max_time_s");
        c.max_retries = max_retries;
        c.max_passes = max_passes;
        c.survivors = survivors;
        c.planner = planner;
        c.route_planner = route_planner;
        c.greedy = greedy;
        c.frame_interval_s = self.float("output.frame_interval_s");

        issues.extend(c.validate());
        if issues.is_empty() {
            Ok(c)
        } else {
            Err(ConfigError { issues })
        }
    }
}

/// 600 m south of the lowest burning cell, level with the burning centroid.
fn launch_below(mask: &crate::fire_world::FireMask) -> Point {
    let centers: Vec<Point> = mask.burning_cells().map(|c| mask.cell_center(c)).collect();
    let x = crate::geometry::centroid(centers.iter()).map_or(mask.origin().x, |c| c.x);
    let y = centers.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let y = if y.is_finite() { y } else { mask.origin().y };
    Point::new(x, y - 600.0)
}

fn as_pair(v: &Value) -> Option<(f64, f64)> {
    let num = |v: &Value| match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    match v {
        Value::Array(xy) if xy.len() == 2 => Some((num(&xy[0])?, num(&xy[1])?)),
        _ => None,
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "datetime",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
    }
}

fn coerce(kind: Kind, value: &mut Value) -> Result<(), String> {
    let ok = match (kind, &*value) {
        (Kind::Int, Value::Integer(_)) => true,
        (Kind::Float, Value::Float(_)) => true,
        (Kind::Float, Value::Integer(i)) => {
            *value = Value::Float(*i as f64);
            true
        }
        (Kind::Str, Value::String(_)) => true,
        (Kind::Points, Value::Array(items)) => items.iter().all(|p| as_pair(p).is_some()),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("expected {}, got {}", kind.name(), type_name(value)))
    }
}

/// Parses scenario text. Relative `fire.mask_file` paths resolve against
/// `base_dir`; `overrides` are `key=value` strings applied after the file.
pub fn parse_config(text: &str, base_dir: &Path, overrides: &[String]) -> Result<ResolvedConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigError::single("file", e.message().to_string())
    })?;
    let mut values = BTreeMap::new();
    flatten("", &table, &mut values);
    let mut issues = Vec::new();
    for o in overrides {
        match parse_override(o) {
            Ok((k, v)) => {
                values.insert(k, v);
            }
            Err(issue) => issues.push(issue),
        }
    }
    if let Some(Value::String(p)) = values.get_mut("fire.mask_file") {
        let path = PathBuf::from(&*p);
        if path.is_relative() {
            *p = base_dir.join(path).to_string_lossy().into_owned();
        }
    }
    match ResolvedConfig::check(values) {
        Ok(r) if issues.is_empty() => Ok(r),
        Ok(_) => Err(ConfigError { issues }),
        Err(mut e) => {
            issues.append(&mut e.issues);
            Err(ConfigError { issues })
        }
    }
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<ResolvedConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ConfigError::single("file", format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base, overrides)
}

/// Loads, fills defaults and checks every invariant.
pub fn validate_config(path: &Path) -> Result<(ResolvedConfig, ScenarioConfig), ConfigError> {
    let resolved = load_config(path, &[])?;
    let scenario = resolved.to_scenario()?;
    Ok((resolved, scenario))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
        parse_config(text, Path::new("."), &[])?.to_scenario()
    }

    fn keys(e: ConfigError) -> Vec<String> {
        e.issues.into_iter().map(|i| i.key).collect()
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let c = parse("uav.count = 8").unwrap();
        assert_eq!(c.uav_count, 8);
        assert_eq!(c.cruise_speed_mps, 15.0);
        assert_eq!(c.cell_size_m, 450.0);
        assert_eq!(c.greedy.penalty_coefficient, 800.0);
        assert_eq!(c.detection_range_m, 1500.0);
        assert_eq!(c.battery_capacity_mah, 9600.0);
    }

    #[test]
    fn tables_and_dotted_keys_agree() {
        let a = parse_config("uav.count = 3\nuav.speed_mps = 12", Path::new("."), &[]).unwrap();
        let b = parse_config("[uav]\ncount = 3\nspeed_mps = 12.0", Path::new("."), &[]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_speed_is_named() {
        let e = parse("uav.count = 8\nuav.speed_mps = -3").unwrap_err();
        assert_eq!(keys(e), vec!["uav.speed_mps"]);
    }

    #[test]
    fn empty_file_requires_count() {
        let e = parse("").unwrap_err();
        assert_eq!(keys(e), vec!["uav.count"]);
    }

    #[test]
    fn problems_are_collected() {
        let e = parse_config(
            "uav.count = 8\nuav.colour = \"red\"\nmission.dt_s = \"fast\"",
            Path::new("."),
            &["greedy.b=oops".into()],
        )
        .unwrap_err();
        let mut k = keys(e);
        k.sort();
        assert_eq!(k, vec!["greedy.b", "mission.dt_s", "uav.colour"]);
    }

    #[test]
    fn overrides_win() {
        let r = parse_config("uav.count = 8", Path::new("."), &["uav.count=12".into(), "planner.kind=greedy".into()])
            .unwrap();
        let c = r.to_scenario().unwrap();
        assert_eq!(c.uav_count, 12);
        assert_eq!(c.planner.name(), "greedy");
    }

    #[test]
    fn json_round_trip() {
        let r = parse_config("uav.count = 4\nmission.survivors = [[1, 2.5]]", Path::new("."), &[]).unwrap();
        let back = ResolvedConfig::from_json(&r.to_json()).unwrap();
        assert_eq!(r, back);
        assert_eq!(back.to_scenario().unwrap().survivors, vec![Point::new(1.0, 2.5)]);
    }
}
