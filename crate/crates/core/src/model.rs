//! Domain types shared by every module: robot and table state, actions, the
//! combined restaurant state, and action legality.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Position, RestaurantConfig};
use crate::rng::sample_categorical;

/// Values of [`TableState::current_request`].
pub mod request {
    pub const WANT_MENU: u8 = 1;
    pub const READY_TO_ORDER: u8 = 2;
    pub const WANT_FOOD: u8 = 3;
    pub const WANT_DRINKS: u8 = 4;
    pub const WANT_BILL: u8 = 5;
    pub const CASH_READY: u8 = 6;
    pub const CASH_COLLECTED: u8 = 7;
    pub const NEEDS_CLEANING: u8 = 8;
}

/// Largest value of the food, water and cooking stage counters.
pub const FOOD_MAX: u8 = 3;
pub const WATER_MAX: u8 = 3;
pub const COOKING_READY: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RobotState {
    pub x: u32,
    pub y: u32,
}

impl RobotState {
    pub fn at(p: Position) -> Self {
        RobotState { x: p.x, y: p.y }
    }

    pub fn position(self) -> Position {
        Position::new(self.x, self.y)
    }
}

/// Full state of one table, excluding the shared robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TableState {
    pub satisfaction: u8,
    pub food: u8,
    pub water: u8,
    pub cooking_status: u8,
    pub current_request: u8,
    pub hand_raise: u8,
    pub t_since_served: u32,
    pub t_since_food_ready: u32,
    pub t_since_request: u32,
}

impl TableState {
    /// A table that just sat down.
    pub fn seated(satisfaction: u8) -> Self {
        TableState {
            satisfaction,
            food: 0,
            water: 0,
            cooking_status: 0,
            current_request: request::WANT_MENU,
            hand_raise: 1,
            t_since_served: 0,
            t_since_food_ready: 0,
            t_since_request: 0,
        }
    }

    /// The customers have left; the table is absorbing.
    pub fn done(&self) -> bool {
        self.hand_raise == 0
    }

    pub fn eating(&self) -> bool {
        matches!(self.food, 1 | 2)
    }

    pub fn drinking(&self) -> bool {
        matches!(self.water, 1 | 2)
    }

    /// Waiting on the kitchen: food ordered but not yet cooked.
    pub fn food_pending(&self) -> bool {
        self.current_request == request::WANT_FOOD && self.cooking_status < COOKING_READY
    }

    pub fn with_satisfaction(mut self, satisfaction: u8) -> Self {
        self.satisfaction = satisfaction;
        self
    }

    pub fn in_range(&self, cfg: &RestaurantConfig) -> bool {
        let tm = cfg.time_max();
        self.satisfaction <= cfg.sat_max
            && self.food <= FOOD_MAX
            && self.water <= WATER_MAX
            && self.cooking_status <= COOKING_READY
            && (request::WANT_MENU..=request::NEEDS_CLEANING).contains(&self.current_request)
            && self.hand_raise <= 1
            && self.t_since_served <= tm
            && self.t_since_food_ready <= tm
            && self.t_since_request <= tm
    }
}

/// Action kinds in tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionKind {
    Serve,
    GoToTable,
    CommFoodNotReady,
    CommWillReturn,
    NoOp,
}

/// An action of the combined model. Every action except `NoOp` belongs to
/// exactly one table. The derived ordering (kind, then table) is the global
/// tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    pub target_table: Option<usize>,
}

impl Action {
    pub const NO_OP: Action = Action {
        kind: ActionKind::NoOp,
        target_table: None,
    };

    pub fn serve(table: usize) -> Self {
        Action::on(ActionKind::Serve, table)
    }

    pub fn go_to(table: usize) -> Self {
        Action::on(ActionKind::GoToTable, table)
    }

    pub fn food_not_ready(table: usize) -> Self {
        Action::on(ActionKind::CommFoodNotReady, table)
    }

    pub fn will_return(table: usize) -> Self {
        Action::on(ActionKind::CommWillReturn, table)
    }

    fn on(kind: ActionKind, table: usize) -> Self {
        Action {
            kind,
            target_table: Some(table),
        }
    }

    pub fn targets(&self, table: usize) -> bool {
        self.target_table == Some(table)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.target_table {
            Some(t) => write!(f, "{:?}({})", self.kind, t),
            None => write!(f, "{:?}", self.kind),
        }
    }
}

/// The combined restaurant state: the shared robot plus every table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointState {
    pub robot: RobotState,
    pub tables: Vec<TableState>,
    pub clock: u64,
}

impl JointState {
    pub fn all_done(&self) -> bool {
        self.tables.iter().all(TableState::done)
    }
}

/// Robot at its start cell, every table freshly seated with satisfaction
/// drawn from the configured prior.
pub fn initial_joint_state<R: Rng + ?Sized>(cfg: &RestaurantConfig, rng: &mut R) -> JointState {
    let prior = cfg.satisfaction_prior();
    let tables = (0..cfg.n_tables)
        .map(|_| TableState::seated(sample_categorical(&prior, rng) as u8))
        .collect();
    JointState {
        robot: RobotState::at(cfg.robot_start),
        tables,
        clock: 0,
    }
}

/// Legal actions for the observable part of a state, in tie-breaking order.
///
/// Only observable fields are read, so the result is the same for every
/// state in a belief's support.
pub fn legal_actions_for(
    robot: RobotState,
    tables: &[TableState],
    cfg: &RestaurantConfig,
) -> Vec<Action> {
    let mut legal = Vec::with_capacity(tables.len() * 3 + 1);
    legal_actions_into(robot, tables, cfg, &mut legal);
    legal
}

/// Fills `out` with the legal actions, reusing its allocation.
pub fn legal_actions_into(
    robot: RobotState,
    tables: &[TableState],
    cfg: &RestaurantConfig,
    out: &mut Vec<Action>,
) {
    out.clear();
    for (i, t) in tables.iter().enumerate() {
        if t.done() {
            continue;
        }
        let here = robot.position() == cfg.table_position(i);
        if here && !t.food_pending() {
            out.push(Action::serve(i));
        }
        if !here {
            out.push(Action::go_to(i));
        }
        if t.food_pending() {
            out.push(Action::food_not_ready(i));
        }
        out.push(Action::will_return(i));
    }
    out.push(Action::NO_OP);
    out.sort_unstable();
}

pub fn legal_actions(js: &JointState, cfg: &RestaurantConfig) -> Vec<Action> {
    legal_actions_for(js.robot, &js.tables, cfg)
}

pub fn is_legal(
    robot: RobotState,
    tables: &[TableState],
    a: Action,
    cfg: &RestaurantConfig,
) -> bool {
    if a == Action::NO_OP {
        return true;
    }
    let Some(i) = a.target_table else {
        return false;
    };
    let Some(t) = tables.get(i) else {
        return false;
    };
    if t.done() {
        return false;
    }
    let here = robot.position() == cfg.table_position(i);
    match a.kind {
        ActionKind::Serve => here && !t.food_pending(),
        ActionKind::GoToTable => !here,
        ActionKind::CommFoodNotReady => t.food_pending(),
        ActionKind::CommWillReturn => true,
        ActionKind::NoOp => false,
    }
}
