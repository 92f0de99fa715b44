#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use restaurant_pomdp::config::validate_config;
use restaurant_pomdp::dynamics::transition_distribution;
use restaurant_pomdp::model::{initial_joint_state, legal_actions};
use restaurant_pomdp::rng::stream;
use restaurant_pomdp::{step_joint, Action, JointState, RestaurantConfig, TableState};

pub fn three_tables() -> RestaurantConfig {
    validate_config(RestaurantConfig::three_tables()).unwrap()
}

pub fn small() -> RestaurantConfig {
    validate_config(RestaurantConfig::small_instance()).unwrap()
}

pub fn two_tables() -> RestaurantConfig {
    RestaurantConfig::three_tables()
        .with_overrides(&["n_tables=2", "horizon=60"])
        .unwrap()
}

/// States visited by a uniformly random legal walk, restarting whenever the
/// restaurant empties.
pub fn random_walk(cfg: &RestaurantConfig, seed: u64, steps: usize) -> Vec<(JointState, Action)> {
    let mut rng = stream(seed, 7);
    let mut js = initial_joint_state(cfg, &mut rng);
    let mut out = Vec::with_capacity(steps);
    while out.len() < steps {
        if js.all_done() {
            js = initial_joint_state(cfg, &mut rng);
        }
        let legal = legal_actions(&js, cfg);
        let a = legal[rng.random_range(0..legal.len())];
        out.push((js.clone(), a));
        js = step_joint(&js, a, cfg, &mut rng).unwrap().next;
    }
    out
}

/// Exact forward filter over full table states, kept as a map from state to
/// probability. Independent of the belief module.
pub fn oracle_step(
    dist: &BTreeMap<TableState, f64>,
    table: usize,
    a: Action,
    duration: u32,
    z_state: &TableState,
    cfg: &RestaurantConfig,
) -> BTreeMap<TableState, f64> {
    let mut next: BTreeMap<TableState, f64> = BTreeMap::new();
    for (ts, p) in dist {
        for (n, q) in transition_distribution(ts, table, a, duration, cfg)
            .unwrap()
            .entries
        {
            *next.entry(n).or_default() += p * q;
        }
    }
    // keep only states agreeing with the observed variables
    next.retain(|s, _| s.with_satisfaction(0) == z_state.with_satisfaction(0));
    let total: f64 = next.values().sum();
    next.values_mut().for_each(|p| *p /= total);
    next
}

pub fn marginal(dist: &BTreeMap<TableState, f64>, sat_max: u8) -> Vec<f64> {
    let mut m = vec![0.0; usize::from(sat_max) + 1];
    for (s, p) in dist {
        m[usize::from(s.satisfaction)] += p;
    }
    m
}
