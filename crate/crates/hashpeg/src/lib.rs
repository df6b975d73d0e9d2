//! Equilibrium analysis for hashrate-pegged proportional mining rewards.
//!
//! The model: `m` miners with linear costs `c_i` choose hashrates `q_i`. The
//! protocol pays a total reward `r(H) = min(1, (Q/H)^delta)` that is split
//! pro rata, so miner `i` receives `(q_i / H) r(H) - c_i q_i`, where
//! `H = sum q_i`. Below the threshold `Q` the scheme is ordinary
//! proportional payment; above it the reward decays with exponent `delta`,
//! which pulls the competitive total back toward `Q`.
//!
//! The crate answers four kinds of question about that game:
//!
//! * [`solver`] — closed-form pure-strategy equilibria: participation
//!   thresholds, regime classification (below / pinned at / above `Q`), the
//!   equilibrium point or interval system, and the `delta = 0` static
//!   benchmark.
//! * [`verifier`] — independent certification: per-miner grid search over
//!   deviations, first-order conditions (one-sided at the reward kink), and
//!   seeded best-response dynamics.
//! * [`attack`] — profitability of entry, collusion, and sybil identities,
//!   plus token-revaluation response and decay-exponent sweeps.
//! * [`model`] — the primitives shared by all of the above: validated cost
//!   profiles, reward parameters, hashrate profiles, utilities, and
//!   derivatives.
//!
//! All functions are deterministic; anything randomized takes an explicit
//! seed. Results are reported in the caller's input order even though the
//! internals work on cost-sorted data.
//!
//! # Example
//!
//! ```
//! use hashpeg::{solve_equilibrium, CostProfile, Regime, RewardParams};
//!
//! let costs = CostProfile::new(vec![0.1, 0.8]).unwrap();
//! let params = RewardParams::new(1.0, 1.0).unwrap();
//! let eq = solve_equilibrium(&costs, &params).unwrap();
//! assert_eq!(eq.regime, Regime::AtQ);
//! assert!((eq.total_hashrate - 1.0).abs() < 1e-12);
//! ```

pub mod attack;
pub mod error;
pub mod model;
pub mod solver;
pub mod verifier;

pub use attack::{
    collusion_report, delta_sweep, homogeneous_equilibrium_utility, new_miner_optimum,
    new_miner_utility, relative_market_share, revalue, sybil_report, sybil_split_gain,
    CollusionReport, CollusionScenario, NewMinerEntry, PairShare, RevaluationReport,
    ScalingClass, SweepEntry, SybilReport, SybilScenario, SybilSplit, PROFITABILITY_MARGIN,
};
pub use error::{Error, Result};
pub use model::{
    aggregate_x, allocation, reward, utility, utility_derivative, CostProfile, HashrateProfile,
    RevaluationFactor, RewardParams, Side,
};
pub use solver::{
    canonical_point, classify_regime, solve_equilibrium, solve_equilibrium_with, solve_static,
    solve_threshold, thresholds, utilitarian_point, Equilibrium, Interval, Regime,
    SelectionPolicy, StaticEquilibrium, ThresholdCrossing, Thresholds,
    REGIME_BOUNDARY_TOLERANCE,
};
pub use verifier::{
    best_response, best_response_dynamics, default_span, grid_oracle, verify_equilibrium,
    verify_profile, BestResponseResult, Candidate, CandidateKind, DynamicsTrace, GridSearch,
    MinerCheck, UpdateOrder, VerificationReport, VerifyOptions,
};
