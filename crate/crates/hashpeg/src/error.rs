//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by model evaluation, equilibrium solving, and attack
/// analysis.
///
/// Verification *failures* are not errors: the verifier returns a report with
/// a negative verdict instead. Errors are reserved for inputs outside the
/// model's domain and for internal numerical degeneracies.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid cost profile: {0}")]
    InvalidCosts(&'static str),

    #[error("invalid reward parameters: {0}")]
    InvalidParams(&'static str),

    #[error("invalid hashrate profile: {0}")]
    InvalidHashrates(&'static str),

    #[error("hashrate profile has {hashrates} entries but the cost profile has {costs} miners")]
    LengthMismatch { costs: usize, hashrates: usize },

    #[error("total hashrate must be positive and finite")]
    NonPositiveHashrate,

    #[error("aggregate participation X(c) is only defined for positive c")]
    NonPositiveThresholdPoint,

    #[error("threshold target must be finite and at least 1, got {0}")]
    InvalidTarget(f64),

    #[error("X(c) = {target} has no solution with {miners} miners")]
    NoThreshold { target: f64, miners: usize },

    #[error(
        "interval selection infeasible: bounds sum to [{sum_lo}, {sum_hi}], \
         which does not bracket the target total {target}"
    )]
    InfeasibleIntervals {
        sum_lo: f64,
        sum_hi: f64,
        target: f64,
    },

    #[error("collusion analysis requires homogeneous miner costs")]
    HeterogeneousCosts,

    #[error("invalid attack scenario: {0}")]
    InvalidScenario(&'static str),

    #[error("no profitable entry: entrant cost {0} meets or exceeds the marginal reward")]
    NoEntry(f64),

    #[error("revaluation factor must be positive and finite, got {0}")]
    InvalidRevaluation(f64),

    #[error("relative market share undefined: {0}")]
    MarketShareUndefined(&'static str),

    #[error("invalid sweep grid: {0}")]
    InvalidSweep(&'static str),

    #[error("threshold search failed to bracket a crossing (numerical degeneracy)")]
    ThresholdSearchFailed,
}
