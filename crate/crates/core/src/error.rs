use thiserror::Error;

use crate::config::Position;
use crate::model::Action;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("n_tables must be at least 1")]
    NoTables,
    #[error("position ({}, {}) lies outside the grid", .0.x, .0.y)]
    OutOfGrid(Position),
    #[error("two tables share position ({}, {})", .0.x, .0.y)]
    DuplicatePosition(Position),
    #[error("satisfaction_prior must be nonnegative and sum to 1, got sum {0}")]
    PriorNotNormalized(f64),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("override `{0}` is not of the form key=value")]
    BadOverride(String),
    #[error("override names unknown config key `{0}`")]
    UnknownKey(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("action {0} is not legal in this state")]
    IllegalAction(Action),
    #[error("the table has already left")]
    TableDone,
    #[error("the food is not cooked yet")]
    FoodNotCooked,
    #[error("action duration must be at least 1")]
    InvalidDuration,
    #[error("observation for table {table} disagrees with the predicted observable state")]
    ObservationMismatch { table: usize },
    #[error("joint support of {size} outcomes exceeds the cap of {cap}")]
    SupportCapExceeded { size: usize, cap: usize },
    #[error("no legal actions to choose from")]
    NoLegalActions,
    #[error("every table is done")]
    AllTablesDone,
}
