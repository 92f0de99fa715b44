//! Per-table transition function.
//!
//! Everything except satisfaction evolves deterministically. A table that is
//! not being served evolves by [`tick_table`], one call per elapsed time
//! step. Serving a table advances its request and resamples satisfaction.

use rand::Rng;

use crate::config::{Position, RestaurantConfig, PROB_TOLERANCE};
use crate::error::ModelError;
use crate::model::{request, Action, ActionKind, TableState, COOKING_READY, FOOD_MAX, WATER_MAX};
use crate::rng::sample_categorical;

/// Chance that serving lifts a very unsatisfied table by one level.
pub const SERVE_LIFT_FROM_BOTTOM: f64 = 0.3;
/// Chance that serving lifts any other not-yet-maxed table by one level.
pub const SERVE_LIFT: f64 = 0.6;

/// Exact next-state distribution of one table. States are pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionDistribution {
    pub entries: Vec<(TableState, f64)>,
}

impl TransitionDistribution {
    pub fn point(ts: TableState) -> Self {
        TransitionDistribution {
            entries: vec![(ts, 1.0)],
        }
    }

    /// Builds a distribution, merging duplicate states and dropping zero mass.
    pub fn from_weighted<I: IntoIterator<Item = (TableState, f64)>>(items: I) -> Self {
        let mut entries: Vec<(TableState, f64)> = Vec::new();
        for (s, p) in items {
            if p <= 0.0 {
                continue;
            }
            match entries.iter_mut().find(|(e, _)| *e == s) {
                Some((_, q)) => *q += p,
                None => entries.push((s, p)),
            }
        }
        TransitionDistribution { entries }
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= PROB_TOLERANCE
    }

    pub fn is_deterministic(&self) -> bool {
        self.entries.len() == 1
    }

    pub fn probability_of(&self, ts: &TableState) -> f64 {
        self.entries
            .iter()
            .filter(|(s, _)| s == ts)
            .map(|(_, p)| p)
            .sum()
    }

    /// Marginal over satisfaction values `0..=sat_max`.
    pub fn satisfaction_marginal(&self, sat_max: u8) -> Vec<f64> {
        let mut m = vec![0.0; usize::from(sat_max) + 1];
        for (s, p) in &self.entries {
            m[usize::from(s.satisfaction)] += p;
        }
        m
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TableState {
        if let [(only, _)] = self.entries.as_slice() {
            return *only;
        }
        let probs: Vec<f64> = self.entries.iter().map(|(_, p)| *p).collect();
        self.entries[sample_categorical(&probs, rng)].0
    }
}

/// Time steps needed to drive between two cells: the Manhattan distance
/// scaled onto `1..=duration_max_nav`, relative to the grid diameter.
pub fn navigation_duration(from: Position, to: Position, cfg: &RestaurantConfig) -> u32 {
    let diameter = (cfg.grid_width - 1) + (cfg.grid_height - 1);
    if diameter == 0 {
        return 1;
    }
    let scaled = cfg.duration_max_nav * from.manhattan(to);
    scaled.div_ceil(diameter).max(1)
}

/// One time step of a table the robot is not serving.
pub fn tick_table(ts: &TableState, cfg: &RestaurantConfig) -> Result<TableState, ModelError> {
    if ts.done() {
        return Err(ModelError::TableDone);
    }
    let tm = cfg.time_max();
    let stage = cfg.stage_interval();
    let mut next = *ts;

    // the request timer is frozen while the customers eat or drink
    let consuming = ts.eating() || ts.drinking();
    let waited = !consuming && ts.t_since_request < tm;
    if waited {
        next.t_since_request += 1;
    }

    if consuming && ts.t_since_served < tm {
        next.t_since_served += 1;
        if next.t_since_served.is_multiple_of(stage) {
            if ts.eating() {
                next.food = (ts.food + 1).min(FOOD_MAX);
            }
            if ts.drinking() {
                next.water = (ts.water + 1).min(WATER_MAX);
            }
        }
    }

    // The kitchen clock is t_since_request itself: it restarts when the
    // order is taken and nothing can reset it before the food is served.
    if ts.food_pending() && waited && next.t_since_request.is_multiple_of(stage) {
        next.cooking_status += 1;
    }

    let food_ready = ts.current_request == request::WANT_FOOD && ts.cooking_status == COOKING_READY;
    if food_ready && ts.t_since_food_ready < tm {
        next.t_since_food_ready += 1;
    }

    let decay = cfg.decay_interval(ts.current_request == request::WANT_FOOD);
    if waited && next.t_since_request.is_multiple_of(decay) {
        next.satisfaction = ts.satisfaction.saturating_sub(1);
    }

    Ok(next)
}

fn tick_n(ts: &TableState, steps: u32, cfg: &RestaurantConfig) -> Result<TableState, ModelError> {
    let mut s = *ts;
    for _ in 0..steps {
        s = tick_table(&s, cfg)?;
    }
    Ok(s)
}

/// Outcome of the robot serving the table's current request.
pub fn apply_serve(
    ts: &TableState,
    cfg: &RestaurantConfig,
) -> Result<TransitionDistribution, ModelError> {
    if ts.done() {
        return Err(ModelError::TableDone);
    }
    if ts.food_pending() {
        return Err(ModelError::FoodNotCooked);
    }
    let mut next = *ts;
    match ts.current_request {
        request::NEEDS_CLEANING => next.hand_raise = 0,
        r => next.current_request = r + 1,
    }
    next.t_since_request = 0;
    match ts.current_request {
        request::READY_TO_ORDER => next.cooking_status = 0,
        request::WANT_FOOD => {
            next.food = 1;
            next.t_since_served = 0;
            next.t_since_food_ready = 0;
        }
        request::WANT_DRINKS => {
            next.water = 1;
            next.t_since_served = 0;
        }
        _ => {}
    }

    let sat = ts.satisfaction;
    let lift = if sat >= cfg.sat_max {
        0.0
    } else if sat == 0 {
        SERVE_LIFT_FROM_BOTTOM
    } else {
        SERVE_LIFT
    };
    Ok(TransitionDistribution::from_weighted([
        (next.with_satisfaction(sat + 1), lift),
        (next.with_satisfaction(sat), 1.0 - lift),
    ]))
}

/// Next-state distribution of table `table` when the robot executes `a`
/// for `duration` steps.
///
/// A serve occupies the last step of its duration. Every other action,
/// whether aimed at this table or elsewhere, just lets the table evolve.
pub fn transition_distribution(
    ts: &TableState,
    table: usize,
    a: Action,
    duration: u32,
    cfg: &RestaurantConfig,
) -> Result<TransitionDistribution, ModelError> {
    if duration == 0 {
        return Err(ModelError::InvalidDuration);
    }
    if ts.done() {
        return Ok(TransitionDistribution::point(*ts));
    }
    if a.targets(table) {
        match a.kind {
            ActionKind::Serve => {
                if ts.food_pending() {
                    return Err(ModelError::IllegalAction(a));
                }
                let before = tick_n(ts, duration - 1, cfg)?;
                return apply_serve(&before, cfg);
            }
            ActionKind::CommFoodNotReady if !ts.food_pending() => {
                return Err(ModelError::IllegalAction(a));
            }
            _ => {}
        }
    }
    Ok(TransitionDistribution::point(tick_n(ts, duration, cfg)?))
}

pub fn sample_transition<R: Rng + ?Sized>(
    ts: &TableState,
    table: usize,
    a: Action,
    duration: u32,
    cfg: &RestaurantConfig,
    rng: &mut R,
) -> Result<TableState, ModelError> {
    Ok(transition_distribution(ts, table, a, duration, cfg)?.sample(rng))
}
