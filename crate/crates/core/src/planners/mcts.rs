//! Belief-state UCT over the combined model.
//!
//! Observable variables evolve independently of the hidden satisfaction, so
//! the belief after any action sequence is a deterministic function of that
//! sequence. Tree nodes are therefore indexed by action history alone. Each
//! simulation draws a full state from the root belief and pushes it down the
//! tree.

use rand::Rng;

use super::baselines::fcfs_choice;
use super::{MctsParams, Rollout};
use crate::belief::Belief;
use crate::config::RestaurantConfig;
use crate::error::ModelError;
use crate::joint::advance_in_place;
use crate::model::{legal_actions_into, Action, JointState};

#[derive(Debug, Clone, PartialEq)]
pub struct MctsResult {
    /// Most visited root action.
    pub action: Action,
    /// Mean return of `action`: the root value estimate.
    pub value: f64,
    /// `(action, visits, mean return)` for every root action.
    pub root: Vec<(Action, u32, f64)>,
}

struct Edge {
    action: Action,
    visits: u32,
    total: f64,
    child: Option<usize>,
}

impl Edge {
    fn mean(&self) -> f64 {
        self.total / f64::from(self.visits.max(1))
    }
}

struct Node {
    edges: Vec<Edge>,
    visits: u32,
}

impl Node {
    fn new(actions: &[Action]) -> Self {
        Node {
            edges: actions
                .iter()
                .map(|&action| Edge {
                    action,
                    visits: 0,
                    total: 0.0,
                    child: None,
                })
                .collect(),
            visits: 0,
        }
    }

    /// Unvisited edges first (in action order), then UCB1 on returns
    /// rescaled by the observed range.
    fn select(&self, c: f64, lo: f64, hi: f64) -> usize {
        if let Some(i) = self.edges.iter().position(|e| e.visits == 0) {
            return i;
        }
        let span = if hi > lo { hi - lo } else { 1.0 };
        let log_n = f64::from(self.visits).ln();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, e) in self.edges.iter().enumerate() {
            let exploit = (e.mean() - lo) / span;
            let score = exploit + c * (log_n / f64::from(e.visits)).sqrt();
            if score > best_score {
                best = i;
                best_score = score;
            }
        }
        best
    }
}

struct Search<'a> {
    cfg: &'a RestaurantConfig,
    params: &'a MctsParams,
    nodes: Vec<Node>,
    lo: f64,
    hi: f64,
    legal: Vec<Action>,
    path: Vec<(usize, usize, f64, f64)>,
}

impl Search<'_> {
    fn simulate<R: Rng + ?Sized>(
        &mut self,
        state: &mut JointState,
        rng: &mut R,
    ) -> Result<(), ModelError> {
        let gamma = self.cfg.gamma;
        self.path.clear();
        let mut node = 0;
        let mut depth = 0;
        let mut leaf_value = 0.0;
        while depth < self.params.max_depth && !state.all_done() {
            let e = self.nodes[node].select(self.params.exploration, self.lo, self.hi);
            let fresh = self.nodes[node].edges[e].visits == 0;
            let action = self.nodes[node].edges[e].action;
            let (r, d) = advance_in_place(state, action, self.cfg, rng)?;
            self.path.push((node, e, r, gamma.powi(d as i32)));
            depth += 1;
            if fresh {
                if depth < self.params.max_depth && !state.all_done() {
                    legal_actions_into(state.robot, &state.tables, self.cfg, &mut self.legal);
                    self.nodes.push(Node::new(&self.legal));
                    let id = self.nodes.len() - 1;
                    self.nodes[node].edges[e].child = Some(id);
                }
                leaf_value = self.rollout(state, self.params.max_depth - depth, rng)?;
                break;
            }
            match self.nodes[node].edges[e].child {
                Some(c) => node = c,
                None => break,
            }
        }

        let mut g = leaf_value;
        for &(n, e, r, discount) in self.path.iter().rev() {
            g = r + discount * g;
            let edge = &mut self.nodes[n].edges[e];
            edge.visits += 1;
            edge.total += g;
            self.nodes[n].visits += 1;
            self.lo = self.lo.min(g);
            self.hi = self.hi.max(g);
        }
        Ok(())
    }

    fn rollout<R: Rng + ?Sized>(
        &mut self,
        state: &mut JointState,
        steps: usize,
        rng: &mut R,
    ) -> Result<f64, ModelError> {
        let mut total = 0.0;
        let mut discount = 1.0;
        for _ in 0..steps {
            if state.all_done() {
                break;
            }
            let action = match self.params.rollout {
                Rollout::Random => {
                    legal_actions_into(state.robot, &state.tables, self.cfg, &mut self.legal);
                    self.legal[rng.random_range(0..self.legal.len())]
                }
                Rollout::Fcfs => fcfs_choice(state.robot, &state.tables, self.cfg),
            };
            let (r, d) = advance_in_place(state, action, self.cfg, rng)?;
            total += discount * r;
            discount *= self.cfg.gamma.powi(d as i32);
        }
        Ok(total)
    }
}

/// Runs `params.budget` simulations from `b`.
pub fn mcts_search<R: Rng + ?Sized>(
    b: &Belief,
    cfg: &RestaurantConfig,
    params: &MctsParams,
    rng: &mut R,
) -> Result<MctsResult, ModelError> {
    let root_actions = b.legal_actions(cfg);
    if root_actions.is_empty() {
        return Err(ModelError::NoLegalActions);
    }
    let mut search = Search {
        cfg,
        params,
        nodes: vec![Node::new(&root_actions)],
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
        legal: Vec::new(),
        path: Vec::with_capacity(params.max_depth),
    };
    let mut state = b.sample_state(rng);
    for _ in 0..params.budget.max(1) {
        b.sample_into(&mut state, rng);
        search.simulate(&mut state, rng)?;
    }

    let root = &search.nodes[0];
    let mut best = 0;
    for (i, e) in root.edges.iter().enumerate() {
        if e.visits > root.edges[best].visits {
            best = i;
        }
    }
    Ok(MctsResult {
        action: root.edges[best].action,
        value: root.edges[best].mean(),
        root: root
            .edges
            .iter()
            .map(|e| (e.action, e.visits, e.mean()))
            .collect(),
    })
}

pub fn act_mcts<R: Rng + ?Sized>(
    b: &Belief,
    cfg: &RestaurantConfig,
    params: &MctsParams,
    rng: &mut R,
) -> Result<Action, ModelError> {
    if b.all_done() {
        return Ok(Action::NO_OP);
    }
    Ok(mcts_search(b, cfg, params, rng)?.action)
}
