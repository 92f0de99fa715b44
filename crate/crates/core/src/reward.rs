//! Per-table reward and its expectation under a belief.
//!
//! Rewards are defined on transitions `(s, a, s')`. A table the robot is not
//! serving or driving to earns the waiting term once per elapsed time step,
//! discounted within the action by `gamma^k`.

use crate::belief::Belief;
use crate::config::RestaurantConfig;
use crate::dynamics::{tick_table, transition_distribution};
use crate::error::ModelError;
use crate::model::{is_legal, Action, ActionKind, RobotState, TableState};

/// Reward for serving a table whose satisfaction after the serve is `sat_next`.
pub fn serve_reward(sat_next: u8, cfg: &RestaurantConfig) -> f64 {
    cfg.reward.serve_scale * (f64::from(cfg.sat_max) - f64::from(sat_next) + 1.0)
}

/// Cost of driving from `robot` to `table`.
pub fn navigation_reward(robot: RobotState, table: usize, cfg: &RestaurantConfig) -> f64 {
    let distance = robot.position().manhattan(cfg.table_position(table));
    -f64::from(distance) / cfg.reward.nav_divisor
}

/// Waiting term for one step in which the table was neither served nor
/// driven to.
pub fn waiting_reward(ts: &TableState, ts_next: &TableState, cfg: &RestaurantConfig) -> f64 {
    let params = &cfg.reward;
    let time = ts.t_since_request.min(params.time_cap) as i32;
    match ts_next.satisfaction {
        s @ 0..=2 => -params.penalty_bases[usize::from(s)].powi(time),
        s if s > ts.satisfaction => params.improvement_bonus,
        _ => 0.0,
    }
}

fn single_step_reward(
    ts: &TableState,
    table: usize,
    a: Action,
    ts_next: &TableState,
    robot: RobotState,
    cfg: &RestaurantConfig,
) -> f64 {
    if ts.done() {
        return 0.0;
    }
    if a.targets(table) {
        match a.kind {
            ActionKind::Serve => return serve_reward(ts_next.satisfaction, cfg),
            ActionKind::GoToTable => return navigation_reward(robot, table, cfg),
            _ => {}
        }
    }
    waiting_reward(ts, ts_next, cfg)
}

/// Reward table `table` receives for the transition `ts -> ts_next` under
/// `a`, with `robot` the position before the action.
///
/// For a drive to this table `ts_next` is the state on arrival; every other
/// case is a single time step.
pub fn reward(
    ts: &TableState,
    table: usize,
    a: Action,
    ts_next: &TableState,
    robot: RobotState,
    cfg: &RestaurantConfig,
) -> Result<f64, ModelError> {
    let duration = if a.targets(table) && a.kind == ActionKind::GoToTable {
        crate::dynamics::navigation_duration(robot.position(), cfg.table_position(table), cfg)
    } else {
        1
    };
    let dist = transition_distribution(ts, table, a, duration, cfg)?;
    if dist.probability_of(ts_next) <= 0.0 {
        return Err(ModelError::IllegalAction(a));
    }
    Ok(single_step_reward(ts, table, a, ts_next, robot, cfg))
}

/// Discounted reward table `table` accrues over an action lasting `duration`
/// steps that leaves it in `ts_next`.
///
/// Intermediate states of a non-serving step are deterministic, so they are
/// recomputed here; a serve lands in its last step.
pub fn accrued_reward(
    ts: &TableState,
    table: usize,
    a: Action,
    robot: RobotState,
    duration: u32,
    ts_next: &TableState,
    cfg: &RestaurantConfig,
) -> Result<f64, ModelError> {
    if ts.done() {
        return Ok(0.0);
    }
    if a.targets(table) && a.kind == ActionKind::GoToTable {
        return Ok(navigation_reward(robot, table, cfg));
    }
    let serving = a.targets(table) && a.kind == ActionKind::Serve;
    let idle_steps = if serving { duration - 1 } else { duration };
    let mut total = 0.0;
    let mut discount = 1.0;
    let mut s = *ts;
    for _ in 0..idle_steps {
        let next = tick_table(&s, cfg)?;
        total += discount * waiting_reward(&s, &next, cfg);
        discount *= cfg.gamma;
        s = next;
    }
    if serving {
        total += discount * serve_reward(ts_next.satisfaction, cfg);
    }
    Ok(total)
}

/// One-step expected reward of `a` under belief `b`, summed over tables and
/// discounted within the action's duration.
pub fn expected_reward(b: &Belief, a: Action, cfg: &RestaurantConfig) -> Result<f64, ModelError> {
    let tables = b.observable_tables();
    if !is_legal(b.robot, &tables, a, cfg) {
        return Err(ModelError::IllegalAction(a));
    }
    let duration = b.action_duration(a, cfg);
    let mut total = 0.0;
    for (i, tb) in b.tables.iter().enumerate() {
        for (sat, &p) in tb.satisfaction.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let ts = tb.observed.to_state(sat as u8);
            for (next, q) in transition_distribution(&ts, i, a, duration, cfg)?.entries {
                total += p * q * accrued_reward(&ts, i, a, b.robot, duration, &next, cfg)?;
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate_config, Position};
    use crate::dynamics::tick_table;
    use crate::model::request;

    fn three_tables() -> RestaurantConfig {
        validate_config(RestaurantConfig::three_tables()).unwrap()
    }

    fn robot_at(x: u32, y: u32) -> RobotState {
        RobotState::at(Position::new(x, y))
    }

    #[test]
    fn serve_from_very_unsatisfied_pays_thirty() {
        let cfg = three_tables();
        let ts = TableState::seated(0);
        let next = TableState {
            current_request: 2,
            ..ts
        };
        let r = reward(&ts, 0, Action::serve(0), &next, robot_at(2, 2), &cfg).unwrap();
        assert!((r - 30.0).abs() < 1e-9);
    }

    #[test]
    fn navigation_costs_a_third_of_distance() {
        let cfg = three_tables();
        // table 0 at (2, 2); distance 6 from (5, 5)
        let ts = TableState::seated(5);
        let robot = robot_at(5, 5);
        let d = crate::dynamics::navigation_duration(robot.position(), cfg.table_position(0), &cfg);
        let mut next = ts;
        for _ in 0..d {
            next = tick_table(&next, &cfg).unwrap();
        }
        let r = reward(&ts, 0, Action::go_to(0), &next, robot, &cfg).unwrap();
        assert!((r + 2.0).abs() < 1e-9);
    }

    #[test]
    fn waiting_penalty_cases() {
        let cfg = three_tables();
        let robot = robot_at(5, 5);

        let mut ts = TableState::seated(1);
        ts.t_since_request = 3;
        let next = tick_table(&ts, &cfg).unwrap();
        assert_eq!(next.satisfaction, 1);
        let r = reward(&ts, 0, Action::NO_OP, &next, robot, &cfg).unwrap();
        assert!((r + 4.913).abs() < 1e-9, "{r}");

        // sat 3 -> 4 only happens through a serve; check the formula directly
        let up = waiting_reward(&TableState::seated(3), &TableState::seated(4), &cfg);
        assert_eq!(up, 1.0);

        let ts = TableState::seated(3);
        let next = tick_table(&ts, &cfg).unwrap();
        assert_eq!(next.satisfaction, 3);
        assert_eq!(
            reward(&ts, 0, Action::NO_OP, &next, robot, &cfg).unwrap(),
            0.0
        );
    }

    #[test]
    fn waiting_exponent_is_capped() {
        let cfg = three_tables();
        let mut ts = TableState::seated(0);
        ts.t_since_request = 14;
        assert_eq!(waiting_reward(&ts, &ts, &cfg), -1024.0);
    }

    #[test]
    fn done_table_earns_nothing() {
        let cfg = three_tables();
        let mut ts = TableState::seated(0);
        ts.hand_raise = 0;
        assert_eq!(
            reward(&ts, 0, Action::NO_OP, &ts, robot_at(0, 0), &cfg).unwrap(),
            0.0
        );
        assert_eq!(
            accrued_reward(&ts, 0, Action::go_to(0), robot_at(0, 0), 3, &ts, &cfg).unwrap(),
            0.0
        );
    }

    #[test]
    fn infeasible_pair_is_rejected() {
        let cfg = three_tables();
        let ts = TableState::seated(3);
        let jump = TableState {
            current_request: request::WANT_BILL,
            ..ts
        };
        assert!(reward(&ts, 0, Action::NO_OP, &jump, robot_at(0, 0), &cfg).is_err());
    }

    #[test]
    fn serve_reward_decreases_with_satisfaction() {
        let cfg = three_tables();
        let rewards: Vec<f64> = (0..=5).map(|s| serve_reward(s, &cfg)).collect();
        assert!(rewards.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(rewards[5], 5.0);
    }

    #[test]
    fn durative_accrual_discounts_each_step() {
        let cfg = three_tables();
        let mut ts = TableState::seated(0);
        ts.t_since_request = 2;
        // three idle steps at sat 0: -(2^2 + g 2^3 + g^2 2^4)
        let mut end = ts;
        for _ in 0..3 {
            end = tick_table(&end, &cfg).unwrap();
        }
        let r = accrued_reward(&ts, 1, Action::go_to(0), robot_at(0, 0), 3, &end, &cfg).unwrap();
        let g = cfg.gamma;
        assert!((r + (4.0 + g * 8.0 + g * g * 16.0)).abs() < 1e-9);
    }
}
