//! Enumeration checks behind `restaurant verify`.

use std::collections::{BTreeMap, HashSet, VecDeque};

use rand::Rng;
use restaurant_pomdp::belief::Observation;
use restaurant_pomdp::config::{validate_config, Position};
use restaurant_pomdp::dynamics::transition_distribution;
use restaurant_pomdp::joint::action_duration;
use restaurant_pomdp::model::{legal_actions, TableState};
use restaurant_pomdp::reward::{reward, waiting_reward};
use restaurant_pomdp::rng::stream;
use restaurant_pomdp::{
    belief_init, belief_step, enumerate_joint_transitions, observe, Action, JointState, ModelError,
    RestaurantConfig, RobotState,
};

use crate::CliError;

const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, failure: Option<String>, ok: String) -> CheckResult {
    match failure {
        Some(detail) => CheckResult {
            name,
            passed: false,
            detail,
        },
        None => CheckResult {
            name,
            passed: true,
            detail: ok,
        },
    }
}

/// Runs every check on `cfg`. Only model errors abort; a failed check is
/// reported in its result.
pub fn run_checks(cfg: &RestaurantConfig, seed: u64) -> Result<Vec<CheckResult>, CliError> {
    Ok(vec![
        transition_row_sums(cfg)?,
        belief_vs_brute_force(cfg, seed)?,
        reward_spot_table(cfg)?,
        marginal_consistency(cfg, seed)?,
    ])
}

fn initial_states(cfg: &RestaurantConfig) -> Result<Vec<(JointState, f64)>, ModelError> {
    let b = belief_init(cfg);
    if b.support_size() > cfg.support_cap {
        return Err(ModelError::SupportCapExceeded {
            size: b.support_size(),
            cap: cfg.support_cap,
        });
    }
    Ok(b.support())
}

/// Every joint state reachable from a positive-probability start, breadth
/// first. Fails once more than `support_cap` states have been found.
pub fn reachable_states(cfg: &RestaurantConfig) -> Result<Vec<JointState>, ModelError> {
    let normalize = |js: &JointState| JointState {
        clock: 0,
        ..js.clone()
    };
    let mut seen: HashSet<JointState> = HashSet::new();
    let mut queue: VecDeque<JointState> = VecDeque::new();
    for (js, _) in initial_states(cfg)? {
        if seen.insert(normalize(&js)) {
            queue.push_back(normalize(&js));
        }
    }
    let mut order = Vec::new();
    while let Some(js) = queue.pop_front() {
        for a in legal_actions(&js, cfg) {
            for o in enumerate_joint_transitions(&js, a, cfg)? {
                let next = normalize(&o.next);
                if !seen.contains(&next) {
                    if seen.len() >= cfg.support_cap {
                        return Err(ModelError::SupportCapExceeded {
                            size: seen.len() + 1,
                            cap: cfg.support_cap,
                        });
                    }
                    seen.insert(next.clone());
                    queue.push_back(next);
                }
            }
        }
        order.push(js);
    }
    Ok(order)
}

pub fn transition_row_sums(cfg: &RestaurantConfig) -> Result<CheckResult, ModelError> {
    let states = reachable_states(cfg)?;
    let mut rows = 0usize;
    let mut failure = None;
    'outer: for js in &states {
        for a in legal_actions(js, cfg) {
            let d = action_duration(js.robot, a, cfg);
            for (i, ts) in js.tables.iter().enumerate() {
                let total = transition_distribution(ts, i, a, d, cfg)?.total();
                if (total - 1.0).abs() > TOLERANCE {
                    failure = Some(format!("table {i} under {a} sums to {total} from {ts:?}"));
                    break 'outer;
                }
            }
            let total: f64 = enumerate_joint_transitions(js, a, cfg)?
                .iter()
                .map(|o| o.probability)
                .sum();
            if (total - 1.0).abs() > TOLERANCE {
                failure = Some(format!("joint row under {a} sums to {total}"));
                break 'outer;
            }
            rows += 1;
        }
    }
    Ok(result(
        "transition row sums",
        failure,
        format!("{rows} rows over {} reachable states", states.len()),
    ))
}

/// Exact filter over full joint states: propagate, keep the states that
/// agree with the observations, renormalize.
fn brute_force_filter(
    dist: &[(JointState, f64)],
    a: Action,
    z: &[Observation],
    cfg: &RestaurantConfig,
) -> Result<Vec<(JointState, f64)>, ModelError> {
    let mut next: BTreeMap<Vec<TableState>, (JointState, f64)> = BTreeMap::new();
    for (js, p) in dist {
        for o in enumerate_joint_transitions(js, a, cfg)? {
            let consistent = o
                .next
                .tables
                .iter()
                .zip(z)
                .all(|(t, zi)| observe(t, a) == *zi);
            if consistent {
                next.entry(o.next.tables.clone()).or_insert((o.next, 0.0)).1 += p * o.probability;
            }
        }
        if next.len() > cfg.support_cap {
            return Err(ModelError::SupportCapExceeded {
                size: next.len(),
                cap: cfg.support_cap,
            });
        }
    }
    let total: f64 = next.values().map(|(_, p)| p).sum();
    Ok(next.into_values().map(|(js, p)| (js, p / total)).collect())
}

pub fn belief_vs_brute_force(cfg: &RestaurantConfig, seed: u64) -> Result<CheckResult, ModelError> {
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    let mut failure = None;
    for seq in 0..20u64 {
        let mut rng = stream(seed.wrapping_add(seq), 5);
        let mut dist = initial_states(cfg)?;
        let mut js = dist[rng.random_range(0..dist.len())].0.clone();
        let mut b = belief_init(cfg);
        for _ in 0..20 {
            if js.all_done() {
                break;
            }
            let legal = b.legal_actions(cfg);
            let a = legal[rng.random_range(0..legal.len())];
            let res = restaurant_pomdp::step_joint(&js, a, cfg, &mut rng)?;
            b = belief_step(&b, a, res.duration, &res.obs, cfg)?;
            dist = brute_force_filter(&dist, a, &res.obs, cfg)?;
            for (i, tb) in b.tables.iter().enumerate() {
                let mut m = vec![0.0; tb.satisfaction.len()];
                for (s, p) in &dist {
                    m[usize::from(s.tables[i].satisfaction)] += p;
                }
                for (x, y) in tb.satisfaction.iter().zip(&m) {
                    worst = worst.max((x - y).abs());
                    compared += 1;
                }
            }
            js = res.next;
        }
        if worst > TOLERANCE {
            failure = Some(format!("sequence {seq}: marginal off by {worst:e}"));
            break;
        }
    }
    Ok(result(
        "belief vs brute force",
        failure,
        format!("{compared} entries, max deviation {worst:e}"),
    ))
}

/// The five reference rewards, evaluated on the three-table preset with the
/// reward parameters of `cfg`.
pub fn reward_spot_values(cfg: &RestaurantConfig) -> Result<[f64; 5], CliError> {
    let three_tables = validate_config(RestaurantConfig {
        reward: cfg.reward.clone(),
        ..RestaurantConfig::three_tables()
    })?;
    let robot = RobotState::at(Position::new(5, 5));
    let very_unsatisfied = TableState::seated(0);
    let serve_next = TableState {
        current_request: 2,
        ..very_unsatisfied
    };
    let serve = reward(
        &very_unsatisfied,
        0,
        Action::serve(0),
        &serve_next,
        RobotState::at(three_tables.table_position(0)),
        &three_tables,
    )?;

    // table 0 sits 6 cells from (5, 5)
    let fresh = TableState::seated(5);
    let d = action_duration(robot, Action::go_to(0), &three_tables);
    let arrived =
        transition_distribution(&fresh, 0, Action::go_to(0), d, &three_tables)?.entries[0].0;
    let nav = reward(&fresh, 0, Action::go_to(0), &arrived, robot, &three_tables)?;

    let waiting = TableState {
        t_since_request: 3,
        ..TableState::seated(1)
    };
    let waited =
        transition_distribution(&waiting, 0, Action::NO_OP, 1, &three_tables)?.entries[0].0;
    let penalty = reward(&waiting, 0, Action::NO_OP, &waited, robot, &three_tables)?;

    let improved = waiting_reward(
        &TableState::seated(3),
        &TableState::seated(4),
        &three_tables,
    );

    let content = TableState::seated(3);
    let still = transition_distribution(&content, 0, Action::NO_OP, 1, &three_tables)?.entries[0].0;
    let flat = reward(&content, 0, Action::NO_OP, &still, robot, &three_tables)?;
    Ok([serve, nav, penalty, improved, flat])
}

pub const REWARD_SPOT_EXPECTED: [f64; 5] = [30.0, -2.0, -4.913, 1.0, 0.0];

pub fn reward_spot_table(cfg: &RestaurantConfig) -> Result<CheckResult, CliError> {
    let got = reward_spot_values(cfg)?;
    let failure = got
        .iter()
        .zip(REWARD_SPOT_EXPECTED)
        .enumerate()
        .find(|(_, (g, want))| (*g - want).abs() > TOLERANCE)
        .map(|(k, (g, want))| format!("case {} gave {g}, expected {want}", k + 1));
    Ok(result("reward spot table", failure, format!("{got:?}")))
}

pub fn marginal_consistency(cfg: &RestaurantConfig, seed: u64) -> Result<CheckResult, ModelError> {
    let mut rng = stream(seed, 6);
    let starts = initial_states(cfg)?;
    let mut js = starts[0].0.clone();
    let mut checked = 0usize;
    let mut failure = None;
    'outer: for _ in 0..500 {
        if js.all_done() {
            js = starts[rng.random_range(0..starts.len())].0.clone();
        }
        let legal = legal_actions(&js, cfg);
        let a = legal[rng.random_range(0..legal.len())];
        let joint = enumerate_joint_transitions(&js, a, cfg)?;
        let d = action_duration(js.robot, a, cfg);
        for (i, ts) in js.tables.iter().enumerate() {
            for (s, p) in transition_distribution(ts, i, a, d, cfg)?.entries {
                let m: f64 = joint
                    .iter()
                    .filter(|o| o.next.tables[i] == s)
                    .map(|o| o.probability)
                    .sum();
                if (m - p).abs() > TOLERANCE {
                    failure = Some(format!("table {i} under {a}: joint {m} vs single {p}"));
                    break 'outer;
                }
            }
        }
        checked += 1;
        js = restaurant_pomdp::step_joint(&js, a, cfg, &mut rng)?.next;
    }
    Ok(result(
        "marginal consistency",
        failure,
        format!("{checked} state-action pairs"),
    ))
}
