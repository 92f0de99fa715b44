//! Policies over the belief of the combined model.

mod baselines;
mod expectimax;
mod mcts;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::Belief;
use crate::config::RestaurantConfig;
use crate::error::ModelError;
use crate::model::Action;

pub use baselines::{act_fcfs, act_greedy, act_random};
pub use expectimax::value_expectimax;
pub use mcts::{act_mcts, mcts_search, MctsResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rollout {
    Random,
    Fcfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MctsParams {
    /// Simulations per decision.
    pub budget: usize,
    /// UCB1 exploration constant, applied to returns rescaled to [0, 1].
    pub exploration: f64,
    /// Actions per simulation, tree and rollout combined.
    pub max_depth: usize,
    pub rollout: Rollout,
}

impl Default for MctsParams {
    fn default() -> Self {
        MctsParams {
            budget: 1000,
            exploration: std::f64::consts::SQRT_2,
            max_depth: 10,
            rollout: Rollout::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Policy {
    Random,
    Fcfs,
    Greedy,
    Mcts(MctsParams),
    Expectimax { depth: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyParseError {
    #[error("unknown policy `{0}` (expected random, fcfs, greedy, mcts or expectimax)")]
    UnknownPolicy(String),
    #[error("bad parameter `{0}` for policy `{1}`")]
    BadParam(String, String),
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Random => "random",
            Policy::Fcfs => "fcfs",
            Policy::Greedy => "greedy",
            Policy::Mcts(_) => "mcts",
            Policy::Expectimax { .. } => "expectimax",
        }
    }

    pub fn act<R: Rng + ?Sized>(
        &self,
        b: &Belief,
        cfg: &RestaurantConfig,
        rng: &mut R,
    ) -> Result<Action, ModelError> {
        match self {
            Policy::Random => act_random(b, &b.legal_actions(cfg), rng),
            Policy::Fcfs => act_fcfs(b, cfg),
            Policy::Greedy => act_greedy(b, cfg),
            Policy::Mcts(params) => act_mcts(b, cfg, params, rng),
            Policy::Expectimax { depth } => value_expectimax(b, *depth, cfg).map(|(a, _)| a),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Mcts(p) => write!(
                f,
                "mcts:budget={},c={},depth={},rollout={}",
                p.budget,
                p.exploration,
                p.max_depth,
                match p.rollout {
                    Rollout::Random => "random",
                    Rollout::Fcfs => "fcfs",
                }
            ),
            Policy::Expectimax { depth } => write!(f, "expectimax:depth={depth}"),
            other => f.write_str(other.name()),
        }
    }
}

/// Parses `NAME[:k=v,...]`, e.g. `mcts:budget=1000,depth=10,c=1.4`.
impl FromStr for Policy {
    type Err = PolicyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (s.trim(), ""),
        };
        let pairs: Vec<(&str, &str)> = params
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                p.split_once('=')
                    .map(|(k, v)| (k.trim(), v.trim()))
                    .ok_or_else(|| PolicyParseError::BadParam(p.to_string(), name.to_string()))
            })
            .collect::<Result<_, _>>()?;
        let bad = |k: &str| PolicyParseError::BadParam(k.to_string(), name.to_string());

        let policy = match name.to_ascii_lowercase().as_str() {
            "random" => Policy::Random,
            "fcfs" => Policy::Fcfs,
            "greedy" => Policy::Greedy,
            "mcts" => {
                let mut p = MctsParams::default();
                for &(k, v) in &pairs {
                    match k {
                        "budget" | "sims" => p.budget = v.parse().map_err(|_| bad(k))?,
                        "c" | "exploration" => p.exploration = v.parse().map_err(|_| bad(k))?,
                        "depth" | "max_depth" => p.max_depth = v.parse().map_err(|_| bad(k))?,
                        "rollout" => {
                            p.rollout = match v {
                                "random" => Rollout::Random,
                                "fcfs" => Rollout::Fcfs,
                                _ => return Err(bad(k)),
                            }
                        }
                        _ => return Err(bad(k)),
                    }
                }
                if p.budget == 0
                    || p.max_depth == 0
                    || p.exploration.is_nan()
                    || p.exploration < 0.0
                {
                    return Err(bad(params));
                }
                return Ok(Policy::Mcts(p));
            }
            "expectimax" => {
                let mut depth = 2;
                for &(k, v) in &pairs {
                    match k {
                        "depth" => depth = v.parse().map_err(|_| bad(k))?,
                        _ => return Err(bad(k)),
                    }
                }
                if depth == 0 {
                    return Err(bad("depth"));
                }
                return Ok(Policy::Expectimax { depth });
            }
            _ => return Err(PolicyParseError::UnknownPolicy(s.to_string())),
        };
        if let Some((k, _)) = pairs.first() {
            return Err(bad(k));
        }
        Ok(policy)
    }
}
