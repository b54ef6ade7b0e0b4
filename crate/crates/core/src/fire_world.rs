//! Fire region model: binary burning masks, synthetic spread, boundary
//! extraction and the uniform survey-point grid laid over the burning area.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;

/// Default survey grid cell edge in meters.
pub const DEFAULT_CELL_SIZE_M: f64 = 450.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaskError {
    #[error("mask format error in `{field}`: {reason}")]
    Format { field: String, reason: String },
    #[error("cannot read mask file {path}: {reason}")]
    Io { path: String, reason: String },
}

fn format_err(field: impl Into<String>, reason: impl Into<String>) -> MaskError {
    MaskError::Format {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Raster cell coordinate; row 0 is the southernmost row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { row, col }
    }
}

/// Binary raster of burning cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireMask {
    width: usize,
    height: usize,
    resolution_m: f64,
    origin: Point,
    burning: Vec<bool>,
}

impl FireMask {
    /// An all-clear mask.
    pub fn new(width: usize, height: usize, resolution_m: f64, origin: Point) -> Result<Self, MaskError> {
        if width == 0 {
            return Err(format_err("width", "must be at least 1"));
        }
        if height == 0 {
            return Err(format_err("height", "must be at least 1"));
        }
        if !(resolution_m > 0.0) || !resolution_m.is_finite() {
            return Err(format_err("resolution_m", format!("must be > 0, got {resolution_m}")));
        }
        Ok(Self {
            width,
            height,
            resolution_m,
            origin,
            burning: vec![false; width * height],
        })
    }

    /// Builds a mask from rows of `'0'`/`'1'` characters, row 0 first (south).
    pub fn from_rows(rows: &[&str], resolution_m: f64, origin: Point) -> Result<Self, MaskError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut mask = Self::new(width, height, resolution_m, origin)?;
        for (row, line) in rows.iter().enumerate() {
            mask.fill_row(row, line)?;
        }
        Ok(mask)
    }

    fn fill_row(&mut self, row: usize, line: &str) -> Result<(), MaskError> {
        let n = line.chars().count();
        if n != self.width {
            return Err(format_err(
                format!("row {row}"),
                format!("expected {} cells (width), found {n}", self.width),
            ));
        }
        for (col, ch) in line.chars().enumerate() {
            let v = match ch {
                '0' => false,
                '1' => true,
                other => {
                    return Err(format_err(
                        format!("row {row}"),
                        format!("invalid cell character {other:?} at column {col}"),
                    ))
                }
            };
            self.set(Cell::new(col, row), v);
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution_m(&self) -> f64 {
        self.resolution_m
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    fn idx(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    pub fn is_burning(&self, cell: Cell) -> bool {
        cell.col < self.width && cell.row < self.height && self.burning[self.idx(cell)]
    }

    pub fn set(&mut self, cell: Cell, burning: bool) {
        let i = self.idx(cell);
        self.burning[i] = burning;
    }

    pub fn burning_count(&self) -> usize {
        self.burning.iter().filter(|b| **b).count()
    }

    /// Burning cells in row-major order.
    pub fn burning_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.burning
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| Cell::new(i % self.width, i / self.width))
    }

    /// Center of a raster cell in world meters.
    pub fn cell_center(&self, cell: Cell) -> Point {
        Point::new(
            self.origin.x + (cell.col as f64 + 0.5) * self.resolution_m,
            self.origin.y + (cell.row as f64 + 0.5) * self.resolution_m,
        )
    }

    /// True when both masks describe the same raster geometry.
    pub fn same_geometry(&self, other: &FireMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.resolution_m == other.resolution_m
            && self.origin == other.origin
    }

    fn neighbors(&self, cell: Cell, neighborhood: Neighborhood) -> impl Iterator<Item = Cell> + '_ {
        let offsets: &'static [(i64, i64)] = match neighborhood {
            Neighborhood::Four => &[(0, -1), (-1, 0), (1, 0), (0, 1)],
            Neighborhood::Eight => &[(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)],
        };
        let (w, h) = (self.width as i64, self.height as i64);
        offsets.iter().filter_map(move |(dc, dr)| {
            let c = cell.col as i64 + dc;
            let r = cell.row as i64 + dr;
            (c >= 0 && r >= 0 && c < w && r < h).then(|| Cell::new(c as usize, r as usize))
        })
    }

    /// Serializes to the plain-text mask format.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "width={}\nheight={}\nresolution_m={}\norigin_x_m={}\norigin_y_m={}\n",
            self.width, self.height, self.resolution_m, self.origin.x, self.origin.y
        );
        for row in 0..self.height {
            for col in 0..self.width {
                out.push(if self.is_burning(Cell::new(col, row)) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Parses the plain-text mask format: `key=value` header lines followed
    /// by `height` rows of `width` characters, southernmost row first.
    pub fn parse(text: &str) -> Result<Self, MaskError> {
        let mut header: HashMap<&str, &str> = HashMap::new();
        let mut rows = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some((k, v)) = line.split_once('=') {
                if !rows.is_empty() {
                    return Err(format_err(k.trim(), "header line after raster rows"));
                }
                let k = k.trim();
                if header.insert(k, v.trim()).is_some() {
                    return Err(format_err(k, "duplicate header key"));
                }
            } else {
                rows.push(line);
            }
        }
        for k in header.keys() {
            if !matches!(*k, "width" | "height" | "resolution_m" | "origin_x_m" | "origin_y_m") {
                return Err(format_err(*k, "unknown header key"));
            }
        }
        let int = |key: &str| -> Result<usize, MaskError> {
            let raw = header.get(key).ok_or_else(|| format_err(key, "missing"))?;
            raw.parse::<usize>()
                .map_err(|_| format_err(key, format!("expected a non-negative integer, got {raw:?}")))
        };
        let float = |key: &str, default: Option<f64>| -> Result<f64, MaskError> {
            match (header.get(key), default) {
                (None, Some(d)) => Ok(d),
                (None, None) => Err(format_err(key, "missing")),
                (Some(raw), _) => raw
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format_err(key, format!("expected a number, got {raw:?}"))),
            }
        };
        let width = int("width")?;
        let height = int("height")?;
        let resolution = float("resolution_m", None)?;
        let origin = Point::new(float("origin_x_m", Some(0.0))?, float("origin_y_m", Some(0.0))?);
        let mut mask = Self::new(width, height, resolution, origin)?;
        if rows.len() != height {
            return Err(format_err("height", format!("header says {height} rows, found {}", rows.len())));
        }
        for (row, line) in rows.iter().enumerate() {
            mask.fill_row(row, line)?;
        }
        Ok(mask)
    }
}

impl fmt::Display for FireMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in (0..self.height).rev() {
            for col in 0..self.width {
                f.write_str(if self.is_burning(Cell::new(col, row)) { "#" } else { "." })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Reads a mask file from disk.
pub fn load_mask(path: &Path) -> Result<FireMask, MaskError> {
    let text = std::fs::read_to_string(path).map_err(|e| MaskError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    FireMask::parse(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Neighborhood {
    #[default]
    Four,
    Eight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FireSpreadParams {
    pub ignition_probability: f64,
    pub neighborhood: Neighborhood,
    pub steps_per_update: u32,
}

impl Default for FireSpreadParams {
    fn default() -> Self {
        Self {
            ignition_probability: 0.1,
            neighborhood: Neighborhood::Eight,
            steps_per_update: 1,
        }
    }
}

/// Advances the fire by `steps_per_update` stochastic cellular-automaton
/// steps. Every burning neighbour independently ignites an unburnt cell with
/// `ignition_probability`. Burning cells never extinguish.
pub fn step_fire(mask: &FireMask, params: &FireSpreadParams, rng_seed: u64) -> FireMask {
    let p = params.ignition_probability.clamp(0.0, 1.0);
    let mut current = mask.clone();
    if p == 0.0 {
        return current;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..params.steps_per_update.max(1) {
        let mut next = current.clone();
        for row in 0..current.height {
            for col in 0..current.width {
                let cell = Cell::new(col, row);
                if current.is_burning(cell) {
                    continue;
                }
                for n in current.neighbors(cell, params.neighborhood) {
                    if current.is_burning(n) && rng.random::<f64>() < p {
                        next.set(cell, true);
                        break;
                    }
                }
            }
        }
        current = next;
    }
    current
}

/// Burning cells with at least one non-burning or off-grid 4-neighbour.
pub fn extract_boundary(mask: &FireMask) -> BTreeSet<Cell> {
    mask.burning_cells()
        .filter(|&c| {
            let interior = c.col > 0
                && c.row > 0
                && c.col + 1 < mask.width
                && c.row + 1 < mask.height
                && mask.neighbors(c, Neighborhood::Four).all(|n| mask.is_burning(n));
            !interior
        })
        .collect()
}

/// Unit edges between burning and non-burning (or off-grid) cells, as
/// `[x1, y1, x2, y2]` world-meter segments.
pub fn outline_segments(mask: &FireMask) -> Vec<[f64; 4]> {
    let r = mask.resolution_m;
    let mut segs = Vec::new();
    for cell in extract_boundary(mask) {
        let x0 = mask.origin.x + cell.col as f64 * r;
        let y0 = mask.origin.y + cell.row as f64 * r;
        let (x1, y1) = (x0 + r, y0 + r);
        let clear = |dc: i64, dr: i64| {
            let c = cell.col as i64 + dc;
            let rr = cell.row as i64 + dr;
            c < 0 || rr < 0 || !mask.is_burning(Cell::new(c as usize, rr as usize))
        };
        if clear(0, -1) {
            segs.push([x0, y0, x1, y0]);
        }
        if clear(0, 1) {
            segs.push([x0, y1, x1, y1]);
        }
        if clear(-1, 0) {
            segs.push([x0, y0, x0, y1]);
        }
        if clear(1, 0) {
            segs.push([x1, y0, x1, y1]);
        }
    }
    segs
}

/// Stable survey point identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub u32);

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveyPoint {
    pub id: PointId,
    pub position: Point,
    /// Survey-grid cell (not raster cell) holding the point.
    pub cell: Cell,
}

/// The set of survey points for one boundary update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveySet {
    pub update_index: usize,
    pub cell_size_m: f64,
    pub points: Vec<SurveyPoint>,
}

impl SurveySet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<PointId> {
        self.points.iter().map(|p| p.id).collect()
    }

    pub fn get(&self, id: PointId) -> Option<&SurveyPoint> {
        self.points
            .binary_search_by_key(&id, |p| p.id)
            .ok()
            .map(|i| &self.points[i])
            .or_else(|| self.points.iter().find(|p| p.id == id))
    }

    pub fn positions(&self) -> PositionMap {
        self.points.iter().map(|p| (p.id, p.position)).collect()
    }

    /// Subset holding only the given ids, order preserved.
    pub fn restricted_to(&self, keep: &BTreeSet<PointId>) -> SurveySet {
        SurveySet {
            update_index: self.update_index,
            cell_size_m: self.cell_size_m,
            points: self.points.iter().filter(|p| keep.contains(&p.id)).copied().collect(),
        }
    }
}

pub type PositionMap = BTreeMap<PointId, Point>;

/// Lays a uniform grid of `cell_size_m` cells anchored at the mask origin
/// and emits one point at the centroid of every grid cell containing the
/// center of at least one burning raster cell.
///
/// Point ids are the row-major linear index of the grid cell, so a cell
/// keeps its id across updates as long as the raster geometry is unchanged.
pub fn generate_survey_points(mask: &FireMask, cell_size_m: f64) -> SurveySet {
    assert!(cell_size_m > 0.0, "cell size must be positive");
    let extent_x = mask.width as f64 * mask.resolution_m;
    let grid_cols = (extent_x / cell_size_m).ceil().max(1.0) as usize;
    let mut cells = BTreeSet::new();
    for raster in mask.burning_cells() {
        let c = mask.cell_center(raster);
        let col = ((c.x - mask.origin.x) / cell_size_m).floor() as usize;
        let row = ((c.y - mask.origin.y) / cell_size_m).floor() as usize;
        cells.insert(Cell::new(col, row));
    }
    let points = cells
        .into_iter()
        .map(|cell| SurveyPoint {
            id: PointId((cell.row * grid_cols + cell.col) as u32),
            position: Point::new(
                mask.origin.x + (cell.col as f64 + 0.5) * cell_size_m,
                mask.origin.y + (cell.row as f64 + 0.5) * cell_size_m,
            ),
            cell,
        })
        .collect();
    SurveySet {
        update_index: 0,
        cell_size_m,
        points,
    }
}

/// Parameters for a synthetic, roughly circular fire region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticFire {
    pub width_cells: usize,
    pub height_cells: usize,
    pub resolution_m: f64,
    pub center: Point,
    pub radius_m: f64,
    /// Spread steps applied to the seed disk to roughen its outline.
    pub roughen_steps: u32,
    pub roughen_probability: f64,
}

impl SyntheticFire {
    /// A region sized so the initial mask covers roughly 300 survey cells of
    /// 450 m.
    pub fn eaton_scale() -> Self {
        Self {
            width_cells: 120,
            height_cells: 120,
            resolution_m: 150.0,
            center: Point::new(9000.0, 9000.0),
            radius_m: 3900.0,
            roughen_steps: 4,
            roughen_probability: 0.25,
        }
    }

    pub fn initial_mask(&self, seed: u64) -> FireMask {
        let mut mask = FireMask::new(self.width_cells, self.height_cells, self.resolution_m, Point::default())
            .expect("synthetic fire geometry must be valid");
        for row in 0..self.height_cells {
            for col in 0..self.width_cells {
                let cell = Cell::new(col, row);
                if mask.cell_center(cell).distance(&self.center) <= self.radius_m {
                    mask.set(cell, true);
                }
            }
        }
        if self.roughen_steps == 0 {
            return mask;
        }
        let params = FireSpreadParams {
            ignition_probability: self.roughen_probability,
            neighborhood: Neighborhood::Four,
            steps_per_update: self.roughen_steps,
        };
        step_fire(&mask, &params, seed ^ 0x5eed_f1e0)
    }
}

/// An evolving fire: an initial mask plus the spread model applied between
/// boundary updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireScenario {
    pub initial: FireMask,
    pub spread: FireSpreadParams,
    /// Number of boundary updates (update indices), at least 1.
    pub updates: usize,
}

impl FireScenario {
    /// Masks for update indices `0..updates`. Deterministic in `seed`.
    pub fn masks(&self, seed: u64) -> Vec<FireMask> {
        let mut out = Vec::with_capacity(self.updates.max(1));
        out.push(self.initial.clone());
        for t in 1..self.updates.max(1) {
            let prev = out.last().expect("non-empty");
            let step_seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(t as u64);
            out.push(step_fire(prev, &self.spread, step_seed));
        }
        out
    }
}
