//! Seeded episodes, traces and aggregate metrics.
//!
//! Each episode seed feeds three independent streams: the initial state, the
//! environment dynamics and the policy. Changing the policy therefore never
//! changes which initial satisfactions are drawn.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::belief::{belief_init, belief_step, Belief, Observation};
use crate::config::RestaurantConfig;
use crate::error::ModelError;
use crate::joint::step_joint;
use crate::model::{initial_joint_state, Action, JointState};
use crate::planners::Policy;
use crate::rng::{stream, SimRng, STREAM_DYNAMICS, STREAM_INIT, STREAM_POLICY};

/// Version tag written on every trace line and metrics row.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Clock at the start of the action.
    pub clock: u64,
    pub action: Action,
    pub duration: u32,
    /// Observations after the action.
    pub observations: Vec<Observation>,
    /// True (hidden) satisfaction of every table after the action.
    pub satisfactions: Vec<u8>,
    /// Filtered satisfaction belief of every table after the action.
    pub beliefs: Vec<Vec<f64>>,
    pub table_rewards: Vec<f64>,
    pub reward: f64,
    /// Discounted return accumulated up to and including this step.
    pub discounted_return: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub seed: u64,
    pub policy: String,
    pub config: RestaurantConfig,
    pub steps: Vec<StepRecord>,
    pub discounted_return: f64,
    pub final_state: JointState,
}

impl EpisodeTrace {
    /// `sum_k gamma^clock_k * reward_k` from the recorded steps.
    pub fn recompute_return(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| self.config.gamma.powf(s.clock as f64) * s.reward)
            .sum()
    }

    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|s| s.action).collect()
    }

    /// Longest observed wait at any table during the episode.
    pub fn max_wait(&self) -> u32 {
        self.steps
            .iter()
            .flat_map(|s| s.observations.iter().map(|z| z.t_since_request))
            .max()
            .unwrap_or(0)
    }

    /// Writes one header line, one line per step and one summary line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header = TraceLine::Header {
            schema_version: SCHEMA_VERSION,
            seed: self.seed,
            policy: self.policy.clone(),
            config: self.config.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&header)?)?;
        for s in &self.steps {
            let line = TraceLine::Step {
                schema_version: SCHEMA_VERSION,
                record: s.clone(),
            };
            writeln!(w, "{}", serde_json::to_string(&line)?)?;
        }
        let summary = TraceLine::Summary {
            schema_version: SCHEMA_VERSION,
            steps: self.steps.len(),
            discounted_return: self.discounted_return,
            final_state: self.final_state.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&summary)?)?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> io::Result<EpisodeTrace> {
        let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
        let mut header = None;
        let mut steps = Vec::new();
        let mut summary = None;
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<TraceLine>(&line)? {
                TraceLine::Header {
                    seed,
                    policy,
                    config,
                    ..
                } => header = Some((seed, policy, config)),
                TraceLine::Step { record, .. } => steps.push(record),
                TraceLine::Summary {
                    discounted_return,
                    final_state,
                    ..
                } => summary = Some((discounted_return, final_state)),
            }
        }
        let (seed, policy, config) = header.ok_or_else(|| bad("trace has no header line"))?;
        let (discounted_return, final_state) =
            summary.ok_or_else(|| bad("trace has no summary line"))?;
        Ok(EpisodeTrace {
            seed,
            policy,
            config,
            steps,
            discounted_return,
            final_state,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "line", rename_all = "snake_case")]
enum TraceLine {
    Header {
        schema_version: u32,
        seed: u64,
        policy: String,
        config: RestaurantConfig,
    },
    Step {
        schema_version: u32,
        #[serde(flatten)]
        record: StepRecord,
    },
    Summary {
        schema_version: u32,
        steps: usize,
        discounted_return: f64,
        final_state: JointState,
    },
}

fn simulate<F>(
    cfg: &RestaurantConfig,
    seed: u64,
    policy: String,
    mut choose: F,
) -> Result<EpisodeTrace, ModelError>
where
    F: FnMut(usize, &Belief, &mut SimRng) -> Result<Option<Action>, ModelError>,
{
    let mut init_rng = stream(seed, STREAM_INIT);
    let mut dyn_rng = stream(seed, STREAM_DYNAMICS);
    let mut policy_rng = stream(seed, STREAM_POLICY);

    let mut state = initial_joint_state(cfg, &mut init_rng);
    let mut belief = belief_init(cfg);
    let mut steps = Vec::new();
    let mut ret = 0.0;
    while state.clock < cfg.horizon && !state.all_done() {
        let Some(action) = choose(steps.len(), &belief, &mut policy_rng)? else {
            break;
        };
        let res = step_joint(&state, action, cfg, &mut dyn_rng)?;
        belief = belief_step(&belief, action, res.duration, &res.obs, cfg)?;
        ret += cfg.gamma.powf(state.clock as f64) * res.reward;
        steps.push(StepRecord {
            step: steps.len(),
            clock: state.clock,
            action,
            duration: res.duration,
            satisfactions: res.next.tables.iter().map(|t| t.satisfaction).collect(),
            beliefs: belief
                .tables
                .iter()
                .map(|t| t.satisfaction.clone())
                .collect(),
            observations: res.obs,
            table_rewards: res.table_rewards,
            reward: res.reward,
            discounted_return: ret,
        });
        state = res.next;
    }
    Ok(EpisodeTrace {
        seed,
        policy,
        config: cfg.clone(),
        steps,
        discounted_return: ret,
        final_state: state,
    })
}

/// One episode from the initial state until the horizon is reached or every
/// table has left. Deterministic given `seed`.
pub fn run_episode(
    policy: &Policy,
    cfg: &RestaurantConfig,
    seed: u64,
) -> Result<EpisodeTrace, ModelError> {
    simulate(cfg, seed, policy.to_string(), |_, b, rng| {
        policy.act(b, cfg, rng).map(Some)
    })
}

/// Re-simulates a fixed action sequence under `seed`. Stops early if the
/// episode ends before the sequence does.
pub fn replay_actions(
    actions: &[Action],
    cfg: &RestaurantConfig,
    seed: u64,
) -> Result<EpisodeTrace, ModelError> {
    simulate(cfg, seed, "replay".to_string(), |k, _, _| {
        Ok(actions.get(k).copied())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Episodes on the rayon pool. Falls back to sequential without the
    /// `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// What an evaluation keeps from each episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub discounted_return: f64,
    pub final_satisfaction: Vec<u8>,
    pub max_wait: u32,
    pub tables_done: usize,
}

impl From<&EpisodeTrace> for EpisodeSummary {
    fn from(t: &EpisodeTrace) -> Self {
        EpisodeSummary {
            seed: t.seed,
            discounted_return: t.discounted_return,
            final_satisfaction: t
                .final_state
                .tables
                .iter()
                .map(|s| s.satisfaction)
                .collect(),
            max_wait: t.max_wait(),
            tables_done: t.final_state.tables.iter().filter(|s| s.done()).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub policy: String,
    pub episodes: usize,
    pub base_seed: u64,
    pub mean_return: f64,
    /// Sample standard deviation of the discounted return.
    pub std_return: f64,
    pub std_error: f64,
    pub mean_final_satisfaction: Vec<f64>,
    pub mean_max_wait: f64,
    pub completion_rate: f64,
    /// Per-episode returns in seed order.
    #[serde(skip)]
    pub returns: Vec<f64>,
}

impl Metrics {
    pub fn from_summaries(policy: String, base_seed: u64, summaries: &[EpisodeSummary]) -> Metrics {
        let n = summaries.len();
        let returns: Vec<f64> = summaries.iter().map(|s| s.discounted_return).collect();
        let (mean, std) = mean_std(&returns);
        let tables = summaries.first().map_or(0, |s| s.final_satisfaction.len());
        let mean_final_satisfaction = (0..tables)
            .map(|i| {
                summaries
                    .iter()
                    .map(|s| f64::from(s.final_satisfaction[i]))
                    .sum::<f64>()
                    / n as f64
            })
            .collect();
        let done: usize = summaries.iter().map(|s| s.tables_done).sum();
        Metrics {
            policy,
            episodes: n,
            base_seed,
            mean_return: mean,
            std_return: std,
            std_error: if n > 0 { std / (n as f64).sqrt() } else { 0.0 },
            mean_final_satisfaction,
            mean_max_wait: summaries.iter().map(|s| f64::from(s.max_wait)).sum::<f64>()
                / n.max(1) as f64,
            completion_rate: if n * tables > 0 {
                done as f64 / (n * tables) as f64
            } else {
                0.0
            },
            returns,
        }
    }
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean difference `a - b` over paired episodes and its standard error.
pub fn paired_difference(a: &[f64], b: &[f64]) -> (f64, f64) {
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (mean, std) = mean_std(&diffs);
    (mean, std / (diffs.len().max(1) as f64).sqrt())
}

pub fn run_summaries(
    policy: &Policy,
    cfg: &RestaurantConfig,
    episodes: usize,
    base_seed: u64,
    exec: Execution,
) -> Result<Vec<EpisodeSummary>, ModelError> {
    let one = |k: usize| {
        run_episode(policy, cfg, base_seed.wrapping_add(k as u64)).map(|t| EpisodeSummary::from(&t))
    };
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..episodes).into_par_iter().map(one).collect()
        }
        _ => (0..episodes).map(one).collect(),
    }
}

/// Runs seeds `base_seed .. base_seed + episodes` and aggregates.
pub fn evaluate(
    policy: &Policy,
    cfg: &RestaurantConfig,
    episodes: usize,
    base_seed: u64,
) -> Result<Metrics, ModelError> {
    evaluate_with(policy, cfg, episodes, base_seed, Execution::default())
}

pub fn evaluate_with(
    policy: &Policy,
    cfg: &RestaurantConfig,
    episodes: usize,
    base_seed: u64,
    exec: Execution,
) -> Result<Metrics, ModelError> {
    let summaries = run_summaries(policy, cfg, episodes, base_seed, exec)?;
    Ok(Metrics::from_summaries(
        policy.to_string(),
        base_seed,
        &summaries,
    ))
}
