//! Restaurant waiting-tables domain as a set of table POMDPs sharing one
//! robot.
//!
//! Each table hides a satisfaction level that decays while the customers
//! wait and responds stochastically to service. The crate provides the
//! per-table model ([`dynamics`], [`reward`], [`belief`]), their composition
//! into one restaurant-wide model ([`joint`]), a handful of planners
//! ([`planners`]) and a seeded episode harness ([`harness`]).
//!
//! With the default `parallel` feature, [`harness::evaluate`] runs episodes
//! on the rayon pool; results are identical to sequential execution.

pub mod belief;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod joint;
pub mod model;
pub mod planners;
pub mod reward;
pub mod rng;

pub use belief::{belief_init, belief_step, observe, Belief, Observation};
pub use config::{validate_config, Position, RestaurantConfig, RewardParams};
pub use dynamics::{
    apply_serve, navigation_duration, sample_transition, tick_table, transition_distribution,
    TransitionDistribution,
};
pub use error::{ConfigError, ModelError};
pub use harness::{evaluate, run_episode, EpisodeTrace, Execution, Metrics};
pub use joint::{enumerate_joint_transitions, step_joint, JointStepResult};
pub use model::{
    initial_joint_state, legal_actions, Action, ActionKind, JointState, RobotState, TableState,
};
pub use planners::{MctsParams, Policy};
pub use reward::{expected_reward, reward};
