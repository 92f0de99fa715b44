//! Observations and the exact belief filter over hidden satisfaction.
//!
//! Every table variable except satisfaction is observed exactly, so the
//! belief is the observed remainder of each table plus one categorical vector
//! over `0..=sat_max`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{RestaurantConfig, PROB_TOLERANCE};
use crate::dynamics::{navigation_duration, transition_distribution};
use crate::error::ModelError;
use crate::model::{is_legal, Action, ActionKind, JointState, RobotState, TableState};
use crate::rng::sample_categorical;

/// What the robot sees of one table: every variable but satisfaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub food: u8,
    pub water: u8,
    pub cooking_status: u8,
    pub current_request: u8,
    pub hand_raise: u8,
    pub t_since_served: u32,
    pub t_since_food_ready: u32,
    pub t_since_request: u32,
}

impl Observation {
    /// The table state consistent with this observation at a given
    /// satisfaction.
    pub fn to_state(&self, satisfaction: u8) -> TableState {
        TableState {
            satisfaction,
            food: self.food,
            water: self.water,
            cooking_status: self.cooking_status,
            current_request: self.current_request,
            hand_raise: self.hand_raise,
            t_since_served: self.t_since_served,
            t_since_food_ready: self.t_since_food_ready,
            t_since_request: self.t_since_request,
        }
    }

    pub fn done(&self) -> bool {
        self.hand_raise == 0
    }
}

/// Observation emitted after a table reaches `ts_next`. The action carries
/// no extra information in this model.
pub fn observe(ts_next: &TableState, _a: Action) -> Observation {
    Observation {
        food: ts_next.food,
        water: ts_next.water,
        cooking_status: ts_next.cooking_status,
        current_request: ts_next.current_request,
        hand_raise: ts_next.hand_raise,
        t_since_served: ts_next.t_since_served,
        t_since_food_ready: ts_next.t_since_food_ready,
        t_since_request: ts_next.t_since_request,
    }
}

/// `Pr(z | s', a)`: one when `z` copies the observable part of `s'`.
pub fn observation_likelihood(z: &Observation, ts_next: &TableState, a: Action) -> f64 {
    if observe(ts_next, a) == *z {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableBelief {
    pub observed: Observation,
    pub satisfaction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    pub robot: RobotState,
    pub tables: Vec<TableBelief>,
    pub clock: u64,
}

impl Belief {
    /// Observable table states; satisfaction is set to 0 and must not be read.
    pub fn observable_tables(&self) -> Vec<TableState> {
        self.tables.iter().map(|t| t.observed.to_state(0)).collect()
    }

    pub fn all_done(&self) -> bool {
        self.tables.iter().all(|t| t.observed.done())
    }

    pub fn legal_actions(&self, cfg: &RestaurantConfig) -> Vec<Action> {
        crate::model::legal_actions_for(self.robot, &self.observable_tables(), cfg)
    }

    pub fn action_duration(&self, a: Action, cfg: &RestaurantConfig) -> u32 {
        match (a.kind, a.target_table) {
            (ActionKind::GoToTable, Some(t)) => {
                navigation_duration(self.robot.position(), cfg.table_position(t), cfg)
            }
            _ => 1,
        }
    }

    /// Draws a full state, satisfaction independently per table.
    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> JointState {
        JointState {
            robot: self.robot,
            tables: self
                .tables
                .iter()
                .map(|t| {
                    t.observed
                        .to_state(sample_categorical(&t.satisfaction, rng) as u8)
                })
                .collect(),
            clock: self.clock,
        }
    }

    /// Overwrites `js` with a fresh draw, reusing its table buffer.
    pub fn sample_into<R: Rng + ?Sized>(&self, js: &mut JointState, rng: &mut R) {
        js.robot = self.robot;
        js.clock = self.clock;
        js.tables.clear();
        js.tables.extend(self.tables.iter().map(|t| {
            t.observed
                .to_state(sample_categorical(&t.satisfaction, rng) as u8)
        }));
    }

    /// Number of full states with positive probability.
    pub fn support_size(&self) -> usize {
        self.tables
            .iter()
            .map(|t| t.satisfaction.iter().filter(|&&p| p > 0.0).count())
            .product()
    }

    /// All full states with positive probability, with their weights.
    pub fn support(&self) -> Vec<(JointState, f64)> {
        let mut out = vec![(
            JointState {
                robot: self.robot,
                tables: Vec::with_capacity(self.tables.len()),
                clock: self.clock,
            },
            1.0,
        )];
        for tb in &self.tables {
            let mut grown = Vec::with_capacity(out.len() * tb.satisfaction.len());
            for (js, w) in &out {
                for (sat, &p) in tb.satisfaction.iter().enumerate() {
                    if p > 0.0 {
                        let mut next = js.clone();
                        next.tables.push(tb.observed.to_state(sat as u8));
                        grown.push((next, w * p));
                    }
                }
            }
            out = grown;
        }
        out
    }

    pub fn is_normalized(&self) -> bool {
        self.tables.iter().all(|t| {
            t.satisfaction.iter().all(|&p| p >= 0.0)
                && (t.satisfaction.iter().sum::<f64>() - 1.0).abs() <= PROB_TOLERANCE
        })
    }
}

/// Prior belief: the seated observable state with the configured
/// satisfaction prior on every table.
pub fn belief_init(cfg: &RestaurantConfig) -> Belief {
    let seated = observe(&TableState::seated(0), Action::NO_OP);
    Belief {
        robot: RobotState::at(cfg.robot_start),
        tables: (0..cfg.n_tables)
            .map(|_| TableBelief {
                observed: seated,
                satisfaction: cfg.satisfaction_prior(),
            })
            .collect(),
        clock: 0,
    }
}

/// Prediction half of the filter. Returns the next belief together with the
/// observable state every particle agrees on.
pub fn belief_predict(
    b: &Belief,
    a: Action,
    duration: u32,
    cfg: &RestaurantConfig,
) -> Result<Belief, ModelError> {
    if !is_legal(b.robot, &b.observable_tables(), a, cfg) {
        return Err(ModelError::IllegalAction(a));
    }
    let robot = match (a.kind, a.target_table) {
        (ActionKind::GoToTable, Some(t)) => RobotState::at(cfg.table_position(t)),
        _ => b.robot,
    };
    let mut tables = Vec::with_capacity(b.tables.len());
    for (i, tb) in b.tables.iter().enumerate() {
        let mut predicted: Option<Observation> = None;
        let mut sat = vec![0.0; tb.satisfaction.len()];
        for (s, &p) in tb.satisfaction.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let ts = tb.observed.to_state(s as u8);
            for (next, q) in transition_distribution(&ts, i, a, duration, cfg)?.entries {
                let z = observe(&next, a);
                match predicted {
                    None => predicted = Some(z),
                    // satisfaction never feeds back into observable variables
                    Some(prev) if prev != z => {
                        return Err(ModelError::ObservationMismatch { table: i })
                    }
                    Some(_) => {}
                }
                sat[usize::from(next.satisfaction)] += p * q;
            }
        }
        tables.push(TableBelief {
            observed: predicted.unwrap_or(tb.observed),
            satisfaction: sat,
        });
    }
    Ok(Belief {
        robot,
        tables,
        clock: b.clock + u64::from(duration),
    })
}

/// Bayes conditioning of a predicted belief on observations `z`.
pub fn belief_condition(
    predicted: &Belief,
    a: Action,
    z: &[Observation],
) -> Result<Belief, ModelError> {
    if z.len() != predicted.tables.len() {
        return Err(ModelError::ObservationMismatch {
            table: z.len().min(predicted.tables.len()),
        });
    }
    let mut out = predicted.clone();
    for (i, (tb, zi)) in out.tables.iter_mut().zip(z).enumerate() {
        let weighted: Vec<f64> = tb
            .satisfaction
            .iter()
            .enumerate()
            .map(|(s, &p)| p * observation_likelihood(zi, &tb.observed.to_state(s as u8), a))
            .collect();
        let evidence: f64 = weighted.iter().sum();
        if evidence <= 0.0 {
            return Err(ModelError::ObservationMismatch { table: i });
        }
        // normalize to the predicted mass rather than to 1 so that a
        // constant likelihood leaves the vector bit-identical
        let scale = tb.satisfaction.iter().sum::<f64>() / evidence;
        tb.satisfaction = weighted.into_iter().map(|w| w * scale).collect();
        tb.observed = *zi;
    }
    Ok(out)
}

/// One filter step: predict through the transition model, then condition on
/// the observations.
pub fn belief_step(
    b: &Belief,
    a: Action,
    duration: u32,
    z: &[Observation],
    cfg: &RestaurantConfig,
) -> Result<Belief, ModelError> {
    let predicted = belief_predict(b, a, duration, cfg)?;
    let posterior = belief_condition(&predicted, a, z)?;
    // the observation likelihood does not depend on satisfaction, so
    // conditioning cannot move the marginal
    for (prior, post) in predicted.tables.iter().zip(&posterior.tables) {
        assert!(
            prior
                .satisfaction
                .iter()
                .zip(&post.satisfaction)
                .all(|(p, q)| (p - q).abs() <= PROB_TOLERANCE),
            "observation changed the satisfaction belief"
        );
    }
    Ok(posterior)
}
