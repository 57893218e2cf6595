use std::io;

use thiserror::Error;

use crate::model::PassengerId;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A domain invariant was violated; names the offending field and the
    /// broken constraint, e.g. `params.alpha: C4 violated: rho > alpha`.
    #[error("{field}: {constraint}")]
    Invariant { field: String, constraint: String },

    #[error("unknown passenger id `{0}`")]
    UnknownPassenger(PassengerId),

    #[error("sequence does not permute the coalition: {0}")]
    BadSequence(String),

    #[error("coalition size {size} exceeds the exhaustive-search bound {limit}; use the ratio-rule solver")]
    CoalitionTooLarge { size: usize, limit: usize },

    #[error("{size} players exceed the exact Shapley bound {limit}; use Monte Carlo sampling")]
    GameTooLarge { size: usize, limit: usize },

    #[error("coalition is empty")]
    EmptyCoalition,

    #[error("compensation pool is empty: rho = {rho} must strictly exceed epsilon = {epsilon}")]
    EmptyPool { rho: f64, epsilon: f64 },

    #[error("Shapley players do not match the coalition: {0}")]
    PlayerMismatch(String),

    #[error("Shapley value for `{0}` is not strictly positive")]
    NonPositiveShare(PassengerId),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error("scenario schema error: {0}")]
    Schema(String),

    #[error("cannot serialize scenario: {0}")]
    Serialize(String),

    #[error("invalid sweep grid: {0}")]
    Grid(String),
}

impl Error {
    /// Stable machine-readable code, used in CLI error lines and sweep failure rows.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Invariant { .. } => "invariant",
            Error::UnknownPassenger(_) => "unknown-passenger",
            Error::BadSequence(_) => "bad-sequence",
            Error::CoalitionTooLarge { .. } => "coalition-too-large",
            Error::GameTooLarge { .. } => "game-too-large",
            Error::EmptyCoalition => "empty-coalition",
            Error::EmptyPool { .. } => "empty-pool",
            Error::PlayerMismatch(_) => "player-mismatch",
            Error::NonPositiveShare(_) => "non-positive-share",
            Error::Io { .. } => "io",
            Error::Parse(_) => "parse",
            Error::Schema(_) => "schema",
            Error::Serialize(_) => "serialize",
            Error::Grid(_) => "grid",
        }
    }

    pub(crate) fn invariant(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Invariant {
            field: field.into(),
            constraint: constraint.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
