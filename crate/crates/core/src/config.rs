//! Restaurant configuration, presets and validation.
//!
//! A [`RestaurantConfig`] is a plain JSON-serializable document. Fields left
//! unset (`time_max`, `table_positions`, `satisfaction_prior`) are derived by
//! [`validate_config`], which every entry point runs before simulating.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ConfigError;

/// Tolerance used when checking that a probability vector is normalized.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Default product-support cap for exact joint enumeration.
pub const DEFAULT_SUPPORT_CAP: usize = 100_000;

/// A cell of the restaurant grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub x: u32,
    pub y: u32,
}

impl Position {
    pub const fn new(x: u32, y: u32) -> Self {
        Position { x, y }
    }

    pub fn manhattan(self, other: Position) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

/// Coefficients of the per-table reward function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardParams {
    /// Serve reward is `serve_scale * (sat_max - sat' + 1)`.
    pub serve_scale: f64,
    /// Navigation cost is `-distance / nav_divisor`.
    pub nav_divisor: f64,
    /// Waiting penalty bases for `sat' = 0, 1, 2`.
    pub penalty_bases: [f64; 3],
    /// Cap on the waiting-time exponent.
    pub time_cap: u32,
    /// Reward when an idle table's satisfaction rises into the content range.
    pub improvement_bonus: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            serve_scale: 5.0,
            nav_divisor: 3.0,
            penalty_bases: [2.0, 1.7, 1.4],
            time_cap: 10,
            improvement_bonus: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RestaurantConfig {
    pub n_tables: usize,
    pub grid_width: u32,
    pub grid_height: u32,
    /// One cell per table. Derived from a fixed lattice when unset.
    #[serde(default)]
    pub table_positions: Option<Vec<Position>>,
    pub robot_start: Position,
    pub sat_max: u8,
    /// Upper bound of every timer. Derived as `n_tables * sat_max` when unset.
    pub time_max: Option<u32>,
    pub gamma: f64,
    /// Episode length in time steps.
    pub horizon: u64,
    pub seed: u64,
    pub duration_max_nav: u32,
    pub initial_satisfaction: u8,
    /// Distribution of the initial satisfaction. Point mass at
    /// `initial_satisfaction` when unset.
    pub satisfaction_prior: Option<Vec<f64>>,
    pub reward: RewardParams,
    /// Maximum product support allowed during exact joint enumeration.
    pub support_cap: usize,
}

impl Default for RestaurantConfig {
    fn default() -> Self {
        RestaurantConfig::three_tables()
    }
}

impl RestaurantConfig {
    /// Three tables and one robot on an 11x11 grid, `sat_max = 5`.
    pub fn three_tables() -> Self {
        RestaurantConfig {
            n_tables: 3,
            grid_width: 11,
            grid_height: 11,
            table_positions: Some(vec![
                Position::new(2, 2),
                Position::new(8, 2),
                Position::new(5, 8),
            ]),
            robot_start: Position::new(5, 5),
            sat_max: 5,
            time_max: None,
            gamma: 0.95,
            horizon: 100,
            seed: 0,
            duration_max_nav: 3,
            initial_satisfaction: 5,
            satisfaction_prior: None,
            reward: RewardParams::default(),
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }

    /// One table, `sat_max = 2`, `time_max = 4`, uniform satisfaction prior.
    /// Small enough for exhaustive enumeration.
    pub fn small_instance() -> Self {
        RestaurantConfig {
            n_tables: 1,
            grid_width: 5,
            grid_height: 5,
            table_positions: Some(vec![Position::new(3, 3)]),
            robot_start: Position::new(1, 1),
            sat_max: 2,
            time_max: Some(4),
            gamma: 0.95,
            horizon: 40,
            seed: 0,
            duration_max_nav: 3,
            initial_satisfaction: 2,
            satisfaction_prior: Some(vec![1.0 / 3.0; 3]),
            reward: RewardParams::default(),
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }

    /// Named presets accepted by `--scenario`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "paper-3tables" => Some(Self::three_tables()),
            "small" => Some(Self::small_instance()),
            _ => None,
        }
    }

    pub const PRESET_NAMES: &'static [&'static str] = &["paper-3tables", "small"];

    pub fn time_max(&self) -> u32 {
        self.time_max
            .unwrap_or(self.n_tables as u32 * u32::from(self.sat_max))
    }

    pub fn table_position(&self, table: usize) -> Position {
        match &self.table_positions {
            Some(positions) => positions[table],
            None => default_layout(self.n_tables, self.grid_width, self.grid_height)
                .map(|p| p[table])
                .unwrap_or(self.robot_start),
        }
    }

    pub fn satisfaction_prior(&self) -> Vec<f64> {
        match &self.satisfaction_prior {
            Some(p) => p.clone(),
            None => {
                let mut p = vec![0.0; usize::from(self.sat_max) + 1];
                p[usize::from(self.initial_satisfaction.min(self.sat_max))] = 1.0;
                p
            }
        }
    }

    /// Steps between cooking, eating and drinking stages: `floor(time_max / 3)`.
    pub fn stage_interval(&self) -> u32 {
        (self.time_max() / 3).max(1)
    }

    /// Steps between one-level satisfaction drops. Tables waiting for food
    /// decay on the faster `floor(time_max / (sat_max + 1))` schedule.
    pub fn decay_interval(&self, waiting_for_food: bool) -> u32 {
        let tm = self.time_max();
        let sat_max = u32::from(self.sat_max);
        let d = if waiting_for_food {
            tm / (sat_max + 1)
        } else {
            tm / sat_max
        };
        d.max(1)
    }

    pub fn in_grid(&self, p: Position) -> bool {
        p.x < self.grid_width && p.y < self.grid_height
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RestaurantConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        validate_config(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `key=value` patches. Keys may be dotted (`reward.time_cap`) and
    /// must name an existing field. Values are parsed as JSON, falling back to
    /// a bare string.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self, ConfigError> {
        let mut doc = serde_json::to_value(self).expect("config serializes");
        for raw in overrides {
            let raw = raw.as_ref();
            let (key, value) = raw
                .split_once('=')
                .ok_or_else(|| ConfigError::BadOverride(raw.to_string()))?;
            let value: Value = serde_json::from_str(value.trim())
                .unwrap_or_else(|_| Value::String(value.trim().to_string()));
            let mut slot = &mut doc;
            for part in key.trim().split('.') {
                slot = slot
                    .as_object_mut()
                    .and_then(|o| o.get_mut(part))
                    .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
            }
            *slot = value;
        }
        // a changed table count or sat_max invalidates derived fields that
        // were filled in by an earlier validation pass
        let mut cfg: RestaurantConfig =
            serde_json::from_value(doc).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let touched = |k: &str| {
            overrides
                .iter()
                .any(|o| o.as_ref().split('=').next().map(str::trim) == Some(k))
        };
        if (touched("n_tables") || touched("sat_max")) && !touched("time_max") {
            cfg.time_max = None;
        }
        if touched("n_tables")
            && !touched("table_positions")
            && cfg.table_positions.as_ref().map(Vec::len) != Some(cfg.n_tables)
        {
            cfg.table_positions = None;
        }
        if (touched("sat_max") || touched("initial_satisfaction")) && !touched("satisfaction_prior")
        {
            cfg.satisfaction_prior = None;
        }
        validate_config(cfg)
    }
}

/// Row-major lattice with spacing 3 starting at (1, 1).
fn default_layout(n: usize, width: u32, height: u32) -> Option<Vec<Position>> {
    let cells: Vec<Position> = (1..height)
        .step_by(3)
        .flat_map(|y| (1..width).step_by(3).map(move |x| Position::new(x, y)))
        .take(n)
        .collect();
    (cells.len() == n).then_some(cells)
}

/// Checks every field and fills in derived ones.
pub fn validate_config(mut cfg: RestaurantConfig) -> Result<RestaurantConfig, ConfigError> {
    if cfg.n_tables == 0 {
        return Err(ConfigError::NoTables);
    }
    if cfg.grid_width == 0 || cfg.grid_height == 0 {
        return Err(ConfigError::Invalid(
            "grid dimensions must be positive".into(),
        ));
    }
    if cfg.sat_max == 0 {
        return Err(ConfigError::Invalid("sat_max must be positive".into()));
    }
    if cfg.time_max() < 2 {
        // the kitchen needs two stage intervals to finish cooking
        return Err(ConfigError::Invalid(format!(
            "time_max must be at least 2, got {}",
            cfg.time_max()
        )));
    }
    if !(cfg.gamma > 0.0 && cfg.gamma <= 1.0) {
        return Err(ConfigError::Invalid(format!(
            "gamma must lie in (0, 1], got {}",
            cfg.gamma
        )));
    }
    if cfg.duration_max_nav == 0 {
        return Err(ConfigError::Invalid(
            "duration_max_nav must be positive".into(),
        ));
    }
    if cfg.initial_satisfaction > cfg.sat_max {
        return Err(ConfigError::Invalid(format!(
            "initial_satisfaction {} exceeds sat_max {}",
            cfg.initial_satisfaction, cfg.sat_max
        )));
    }
    if cfg.support_cap == 0 {
        return Err(ConfigError::Invalid("support_cap must be positive".into()));
    }
    if !cfg.in_grid(cfg.robot_start) {
        return Err(ConfigError::OutOfGrid(cfg.robot_start));
    }

    let positions = match cfg.table_positions.take() {
        Some(p) => p,
        None => default_layout(cfg.n_tables, cfg.grid_width, cfg.grid_height).ok_or_else(|| {
            ConfigError::Invalid(format!(
                "grid {}x{} too small for the default layout of {} tables",
                cfg.grid_width, cfg.grid_height, cfg.n_tables
            ))
        })?,
    };
    if positions.len() != cfg.n_tables {
        return Err(ConfigError::Invalid(format!(
            "expected {} table positions, got {}",
            cfg.n_tables,
            positions.len()
        )));
    }
    for (i, &p) in positions.iter().enumerate() {
        if !cfg.in_grid(p) {
            return Err(ConfigError::OutOfGrid(p));
        }
        if positions[..i].contains(&p) {
            return Err(ConfigError::DuplicatePosition(p));
        }
    }
    cfg.table_positions = Some(positions);

    let prior = cfg.satisfaction_prior();
    if prior.len() != usize::from(cfg.sat_max) + 1 {
        return Err(ConfigError::Invalid(format!(
            "satisfaction_prior has {} entries, expected sat_max + 1 = {}",
            prior.len(),
            usize::from(cfg.sat_max) + 1
        )));
    }
    if prior.iter().any(|&p| p.is_nan() || p < 0.0) {
        return Err(ConfigError::PriorNotNormalized(prior.iter().sum()));
    }
    let total: f64 = prior.iter().sum();
    if (total - 1.0).abs() > PROB_TOLERANCE {
        return Err(ConfigError::PriorNotNormalized(total));
    }
    cfg.satisfaction_prior = Some(prior);

    let r = &cfg.reward;
    if r.penalty_bases.iter().any(|&b| b.is_nan() || b <= 1.0) {
        return Err(ConfigError::Invalid("penalty bases must exceed 1".into()));
    }
    if r.nav_divisor.is_nan() || r.nav_divisor <= 0.0 {
        return Err(ConfigError::Invalid("nav_divisor must be positive".into()));
    }

    cfg.time_max = Some(cfg.time_max());
    Ok(cfg)
}
