//! The combined restaurant model: N table models sharing one robot.
//!
//! An action belongs to at most one table. Every other table evolves as if
//! the robot did nothing for the action's duration, and the total reward is
//! the sum of per-table rewards.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{observe, Observation};
use crate::config::RestaurantConfig;
use crate::dynamics::{
    apply_serve, navigation_duration, sample_transition, tick_table, transition_distribution,
};
use crate::error::ModelError;
use crate::model::{is_legal, Action, ActionKind, JointState, RobotState};
use crate::reward::{accrued_reward, navigation_reward, serve_reward, waiting_reward};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointStepResult {
    pub next: JointState,
    pub obs: Vec<Observation>,
    /// Sum of `table_rewards`.
    pub reward: f64,
    /// Per-table reward, discounted within the action's duration.
    pub table_rewards: Vec<f64>,
    pub duration: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointOutcome {
    pub next: JointState,
    pub probability: f64,
    pub reward: f64,
}

pub fn action_duration(robot: RobotState, a: Action, cfg: &RestaurantConfig) -> u32 {
    match (a.kind, a.target_table) {
        (ActionKind::GoToTable, Some(t)) => {
            navigation_duration(robot.position(), cfg.table_position(t), cfg)
        }
        _ => 1,
    }
}

fn robot_after(robot: RobotState, a: Action, cfg: &RestaurantConfig) -> RobotState {
    match (a.kind, a.target_table) {
        (ActionKind::GoToTable, Some(t)) => RobotState::at(cfg.table_position(t)),
        _ => robot,
    }
}

/// Executes a legal action, sampling each table's transition independently.
pub fn step_joint<R: Rng + ?Sized>(
    js: &JointState,
    a: Action,
    cfg: &RestaurantConfig,
    rng: &mut R,
) -> Result<JointStepResult, ModelError> {
    if !is_legal(js.robot, &js.tables, a, cfg) {
        return Err(ModelError::IllegalAction(a));
    }
    let duration = action_duration(js.robot, a, cfg);
    let mut tables = Vec::with_capacity(js.tables.len());
    let mut table_rewards = Vec::with_capacity(js.tables.len());
    for (i, ts) in js.tables.iter().enumerate() {
        let next = sample_transition(ts, i, a, duration, cfg, rng)?;
        table_rewards.push(accrued_reward(ts, i, a, js.robot, duration, &next, cfg)?);
        tables.push(next);
    }
    let obs = tables.iter().map(|t| observe(t, a)).collect();
    Ok(JointStepResult {
        next: JointState {
            robot: robot_after(js.robot, a, cfg),
            tables,
            clock: js.clock + u64::from(duration),
        },
        obs,
        reward: table_rewards.iter().sum(),
        table_rewards,
        duration,
    })
}

/// In-place variant of [`step_joint`] for simulation-heavy callers. Skips
/// the legality check and observation bookkeeping; draws from `rng` exactly
/// as `step_joint` does. Returns `(reward, duration)`.
pub fn advance_in_place<R: Rng + ?Sized>(
    js: &mut JointState,
    a: Action,
    cfg: &RestaurantConfig,
    rng: &mut R,
) -> Result<(f64, u32), ModelError> {
    let duration = action_duration(js.robot, a, cfg);
    let mut total = 0.0;
    for (i, ts) in js.tables.iter_mut().enumerate() {
        if ts.done() {
            continue;
        }
        let targeted = a.targets(i);
        if targeted && a.kind == ActionKind::GoToTable {
            total += navigation_reward(js.robot, i, cfg);
            for _ in 0..duration {
                *ts = tick_table(ts, cfg)?;
            }
            continue;
        }
        let serving = targeted && a.kind == ActionKind::Serve;
        let idle = if serving { duration - 1 } else { duration };
        let mut discount = 1.0;
        for _ in 0..idle {
            let next = tick_table(ts, cfg)?;
            total += discount * waiting_reward(ts, &next, cfg);
            discount *= cfg.gamma;
            *ts = next;
        }
        if serving {
            *ts = apply_serve(ts, cfg)?.sample(rng);
            total += discount * serve_reward(ts.satisfaction, cfg);
        }
    }
    js.robot = robot_after(js.robot, a, cfg);
    js.clock += u64::from(duration);
    Ok((total, duration))
}

/// Exact joint next-state distribution: the product of the independent
/// per-table distributions.
pub fn enumerate_joint_transitions(
    js: &JointState,
    a: Action,
    cfg: &RestaurantConfig,
) -> Result<Vec<JointOutcome>, ModelError> {
    if !is_legal(js.robot, &js.tables, a, cfg) {
        return Err(ModelError::IllegalAction(a));
    }
    let duration = action_duration(js.robot, a, cfg);
    let mut per_table = Vec::with_capacity(js.tables.len());
    let mut size: usize = 1;
    for (i, ts) in js.tables.iter().enumerate() {
        let dist = transition_distribution(ts, i, a, duration, cfg)?;
        let outcomes = dist
            .entries
            .into_iter()
            .map(|(next, p)| {
                Ok((
                    next,
                    p,
                    accrued_reward(ts, i, a, js.robot, duration, &next, cfg)?,
                ))
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        size = size.saturating_mul(outcomes.len());
        if size > cfg.support_cap {
            return Err(ModelError::SupportCapExceeded {
                size,
                cap: cfg.support_cap,
            });
        }
        per_table.push(outcomes);
    }

    let robot = robot_after(js.robot, a, cfg);
    let clock = js.clock + u64::from(duration);
    let mut out = vec![JointOutcome {
        next: JointState {
            robot,
            tables: Vec::with_capacity(js.tables.len()),
            clock,
        },
        probability: 1.0,
        reward: 0.0,
    }];
    for outcomes in per_table {
        let mut grown = Vec::with_capacity(out.len() * outcomes.len());
        for partial in &out {
            for &(ts, p, r) in &outcomes {
                let mut next = partial.next.clone();
                next.tables.push(ts);
                grown.push(JointOutcome {
                    next,
                    probability: partial.probability * p,
                    reward: partial.reward + r,
                });
            }
        }
        out = grown;
    }
    Ok(out)
}
