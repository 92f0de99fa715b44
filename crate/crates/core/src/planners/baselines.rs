use rand::Rng;

use crate::belief::Belief;
use crate::config::RestaurantConfig;
use crate::error::ModelError;
use crate::model::{Action, RobotState, TableState};
use crate::reward::expected_reward;

/// Uniform choice among `legal`.
pub fn act_random<R: Rng + ?Sized>(
    _b: &Belief,
    legal: &[Action],
    rng: &mut R,
) -> Result<Action, ModelError> {
    if legal.is_empty() {
        return Err(ModelError::NoLegalActions);
    }
    Ok(legal[rng.random_range(0..legal.len())])
}

/// First come, first served: head for the serviceable table that has waited
/// longest. A table whose food is still cooking is not serviceable.
pub fn act_fcfs(b: &Belief, cfg: &RestaurantConfig) -> Result<Action, ModelError> {
    if b.all_done() {
        return Err(ModelError::AllTablesDone);
    }
    Ok(fcfs_choice(b.robot, &b.observable_tables(), cfg))
}

/// The FCFS rule on observable table states.
pub(crate) fn fcfs_choice(
    robot: RobotState,
    tables: &[TableState],
    cfg: &RestaurantConfig,
) -> Action {
    let mut best: Option<(usize, u32)> = None;
    for (i, t) in tables.iter().enumerate() {
        if t.done() || t.food_pending() {
            continue;
        }
        if best.is_none_or(|(_, w)| t.t_since_request > w) {
            best = Some((i, t.t_since_request));
        }
    }
    match best {
        None => Action::NO_OP,
        Some((i, _)) if robot.position() == cfg.table_position(i) => Action::serve(i),
        Some((i, _)) => Action::go_to(i),
    }
}

/// Myopic maximizer of the one-step expected reward. Ties go to the first
/// action in the fixed action order.
pub fn act_greedy(b: &Belief, cfg: &RestaurantConfig) -> Result<Action, ModelError> {
    let mut best: Option<(Action, f64)> = None;
    for a in b.legal_actions(cfg) {
        let v = expected_reward(b, a, cfg)?;
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((a, v));
        }
    }
    best.map(|(a, _)| a).ok_or(ModelError::NoLegalActions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::{belief_init, observe, TableBelief};
    use crate::config::validate_config;
    use crate::model::request;
    use crate::rng::stream;

    fn three_tables() -> RestaurantConfig {
        validate_config(RestaurantConfig::three_tables()).unwrap()
    }

    fn belief_with(
        cfg: &RestaurantConfig,
        robot: RobotState,
        tables: &[(TableState, Vec<f64>)],
    ) -> Belief {
        let mut b = belief_init(cfg);
        b.robot = robot;
        b.tables = tables
            .iter()
            .map(|(ts, sat)| TableBelief {
                observed: observe(ts, Action::NO_OP),
                satisfaction: sat.clone(),
            })
            .collect();
        b
    }

    fn waited(t: u32) -> TableState {
        TableState {
            t_since_request: t,
            ..TableState::seated(5)
        }
    }

    fn point(sat: usize) -> Vec<f64> {
        let mut v = vec![0.0; 6];
        v[sat] = 1.0;
        v
    }

    #[test]
    fn random_singleton_and_determinism() {
        let cfg = three_tables();
        let b = belief_init(&cfg);
        let mut rng = stream(0, 2);
        assert_eq!(
            act_random(&b, &[Action::NO_OP], &mut rng),
            Ok(Action::NO_OP)
        );
        assert_eq!(
            act_random(&b, &[], &mut rng),
            Err(ModelError::NoLegalActions)
        );
        let legal = b.legal_actions(&cfg);
        let draw = |seed| {
            let mut rng = stream(seed, 2);
            (0..20)
                .map(|_| act_random(&b, &legal, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(4), draw(4));
    }

    #[test]
    fn random_is_uniform() {
        let cfg = three_tables();
        let b = belief_init(&cfg);
        let legal = [
            Action::go_to(0),
            Action::go_to(1),
            Action::go_to(2),
            Action::NO_OP,
        ];
        let mut rng = stream(1, 2);
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            let a = act_random(&b, &legal, &mut rng).unwrap();
            counts[legal.iter().position(|&l| l == a).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 10_000.0 - 0.25).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn fcfs_goes_to_longest_wait() {
        let cfg = three_tables();
        let robot = RobotState::at(cfg.robot_start);
        let b = belief_with(
            &cfg,
            robot,
            &[
                (waited(7), point(5)),
                (waited(2), point(5)),
                (waited(4), point(5)),
            ],
        );
        assert_eq!(act_fcfs(&b, &cfg), Ok(Action::go_to(0)));
        let b = belief_with(
            &cfg,
            RobotState::at(cfg.table_position(0)),
            &[
                (waited(7), point(5)),
                (waited(2), point(5)),
                (waited(4), point(5)),
            ],
        );
        assert_eq!(act_fcfs(&b, &cfg), Ok(Action::serve(0)));
        // ties go to the lowest index
        let b = belief_with(
            &cfg,
            robot,
            &[
                (waited(3), point(5)),
                (waited(3), point(5)),
                (waited(1), point(5)),
            ],
        );
        assert_eq!(act_fcfs(&b, &cfg), Ok(Action::go_to(0)));
    }

    #[test]
    fn fcfs_skip_rule_table() {
        let mut cfg = three_tables();
        cfg.n_tables = 1;
        cfg.table_positions = Some(vec![cfg.table_position(0)]);
        let robot = RobotState::at(cfg.table_position(0));
        for req in 1..=8u8 {
            for cooking in 0..=2u8 {
                let ts = TableState {
                    current_request: req,
                    cooking_status: cooking,
                    ..TableState::seated(5)
                };
                let b = belief_with(&cfg, robot, &[(ts, point(5))]);
                let expected = if req == request::WANT_FOOD && cooking < 2 {
                    Action::NO_OP
                } else {
                    Action::serve(0)
                };
                assert_eq!(
                    act_fcfs(&b, &cfg),
                    Ok(expected),
                    "req {req} cooking {cooking}"
                );
            }
        }
        let done = TableState {
            hand_raise: 0,
            ..TableState::seated(5)
        };
        let b = belief_with(&cfg, robot, &[(done, point(5))]);
        assert_eq!(act_fcfs(&b, &cfg), Err(ModelError::AllTablesDone));
    }

    #[test]
    fn fcfs_skips_cooking_table_when_another_is_serviceable() {
        let cfg = three_tables();
        let cooking = TableState {
            current_request: request::WANT_FOOD,
            t_since_request: 9,
            ..TableState::seated(5)
        };
        let b = belief_with(
            &cfg,
            RobotState::at(cfg.robot_start),
            &[
                (cooking, point(5)),
                (waited(1), point(5)),
                (waited(2), point(5)),
            ],
        );
        assert_eq!(act_fcfs(&b, &cfg), Ok(Action::go_to(2)));
    }

    #[test]
    fn greedy_serves_when_colocated() {
        let mut cfg = three_tables();
        cfg.n_tables = 1;
        cfg.table_positions = Some(vec![cfg.table_position(0)]);
        let b = belief_with(
            &cfg,
            RobotState::at(cfg.table_position(0)),
            &[(waited(0), point(3))],
        );
        assert!((expected_reward(&b, Action::serve(0), &cfg).unwrap() - 12.0).abs() < 1e-12);
        assert_eq!(act_greedy(&b, &cfg), Ok(Action::serve(0)));
    }

    #[test]
    fn greedy_single_legal_action() {
        let cfg = three_tables();
        let done = TableState {
            hand_raise: 0,
            ..TableState::seated(5)
        };
        let b = belief_with(
            &cfg,
            RobotState::at(cfg.robot_start),
            &[(done, point(5)), (done, point(5)), (done, point(5))],
        );
        assert_eq!(act_greedy(&b, &cfg), Ok(Action::NO_OP));
    }

    #[test]
    fn greedy_argmax_is_scale_invariant() {
        let cfg = three_tables();
        let mut scaled = cfg.clone();
        scaled.reward.serve_scale *= 3.0;
        scaled.reward.nav_divisor /= 3.0;
        scaled.reward.improvement_bonus *= 3.0;
        // penalties scale only through their bases; use states with no penalty
        let robot = RobotState::at(cfg.table_position(1));
        let tables = [
            (waited(1), point(4)),
            (waited(0), point(3)),
            (waited(2), point(5)),
        ];
        let b = belief_with(&cfg, robot, &tables);
        assert_eq!(
            act_greedy(&b, &cfg),
            act_greedy(&belief_with(&scaled, robot, &tables), &scaled)
        );
    }
}
