//! Independent equilibrium verification.
//!
//! Nothing here trusts the solver's closed forms. A candidate profile is
//! checked two ways:
//!
//! * a brute-force grid search over each miner's unilateral deviations
//!   (plus the exact kink and the current point), and
//! * the analytic first-order conditions: participants need a vanishing
//!   derivative (one-sided at the reward kink), non-participants need a
//!   non-positive entry derivative.
//!
//! Best-response dynamics round out the toolkit: repeatedly move one miner to
//! their exact best response and watch whether the profile settles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, CostProfile, HashrateProfile, RewardParams};
use crate::solver::Equilibrium;

/// Relative bisection tolerance for interior stationary points.
const BISECT_REL_TOL: f64 = 1e-12;
/// Iteration cap for bisection (2^-200 of the initial bracket).
const BISECT_MAX_ITERS: usize = 200;
/// Width of the band around `H = Q` treated as "at the kink" when applying
/// one-sided derivative conditions (relative to `Q`). Solver outputs for the
/// pinned regime sum to `Q` only up to rounding, so exact comparison against
/// `Q` would misclassify them.
const KINK_BAND: f64 = 1e-9;

/// Where a best-response candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    /// Staying out of the game (utility 0).
    Zero,
    /// Stationary point of the flat-reward branch.
    InteriorBelow,
    /// Deviation that lands the total exactly on the reward kink.
    Boundary,
    /// Stationary point of the decayed-reward branch.
    InteriorAbove,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub kind: CandidateKind,
    pub hashrate: f64,
    pub utility: f64,
}

/// Exact best response of a single miner against a fixed opposing total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponseResult {
    pub best_hashrate: f64,
    pub best_utility: f64,
    /// Least upper bound of the deviation utility. Equals `best_utility`
    /// except against an otherwise-empty network: a sole miner's utility
    /// climbs toward `1` as its hashrate vanishes (the whole reward at
    /// almost no cost) without ever attaining it, so no best response exists
    /// and `best_hashrate` is merely the best attainable candidate.
    pub utility_supremum: f64,
    /// Every candidate that was evaluated, in enumeration order.
    pub candidates: Vec<Candidate>,
}

/// Result of a grid search over one miner's deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub best_hashrate: f64,
    pub best_utility: f64,
}

/// Per-miner verification outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinerCheck {
    pub miner: usize,
    pub hashrate: f64,
    pub utility: f64,
    /// Best grid utility minus current utility.
    pub improvement: f64,
    pub derivative_ok: bool,
    pub participant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub eps: f64,
    pub max_improvement: f64,
    pub checks: Vec<MinerCheck>,
}

/// Options for profile verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Improvement / derivative slack for the epsilon-equilibrium test.
    pub eps: f64,
    /// Number of grid intervals per miner (1000+ recommended for
    /// certification).
    pub grid_steps: usize,
    /// Deviation span; defaults to `2 * max(H, Q)` when `None`.
    pub span: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            grid_steps: 1000,
            span: None,
        }
    }
}

/// Miner update schedule for best-response dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateOrder {
    RoundRobin,
    /// Uniformly random miner each step, from a seeded generator; identical
    /// seeds yield bit-identical traces.
    Random { seed: u64 },
}

/// Trace of a best-response dynamics run.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTrace {
    /// Every profile visited, starting with the initial one (one entry per
    /// single-miner update thereafter).
    pub iterates: Vec<HashrateProfile>,
    pub converged: bool,
    /// Max utility improvement any miner could still realize at the final
    /// profile.
    pub final_gap: f64,
    /// Number of single-miner updates performed.
    pub iterations: usize,
}

impl DynamicsTrace {
    pub fn final_profile(&self) -> &HashrateProfile {
        self.iterates.last().expect("trace always holds the initial profile")
    }
}

/// Utility of playing `deviation` against a fixed opposing total.
fn deviation_utility(others: f64, deviation: f64, cost: f64, params: &RewardParams) -> f64 {
    if deviation == 0.0 {
        return 0.0;
    }
    let h = others + deviation;
    let q = params.q_threshold();
    let r = if h <= q {
        1.0
    } else {
        (q / h).powf(params.delta())
    };
    deviation / h * r - cost * deviation
}

/// Current utility with the convention that an idle miner earns exactly zero
/// (well-defined even when the whole profile is zero).
fn current_utility(
    profile: &HashrateProfile,
    miner: usize,
    costs: &CostProfile,
    params: &RewardParams,
) -> Result<f64> {
    if profile.hashrate(miner) == 0.0 {
        Ok(0.0)
    } else {
        model::utility(profile, miner, costs, params)
    }
}

/// Computes a miner's exact best response to a fixed opposing total.
///
/// The utility is piecewise smooth with concave pieces, so the optimum is one
/// of: staying out, the flat-branch stationary point `sqrt(H_-i/c) - H_-i`
/// (valid only while the total stays below `Q`), the kink `Q - H_-i`, or the
/// decayed-branch stationary point (found by bisection on its first-order
/// condition). All candidates are evaluated and the best kept.
///
/// Against an empty network (`others_total == 0`) no best response exists —
/// see [`BestResponseResult::utility_supremum`] — and the returned point is
/// the best attainable candidate. No profile with a lone active miner is an
/// equilibrium for the same reason.
pub fn best_response(others_total: f64, cost: f64, params: &RewardParams) -> BestResponseResult {
    let q = params.q_threshold();
    let mut candidates = vec![Candidate {
        kind: CandidateKind::Zero,
        hashrate: 0.0,
        utility: 0.0,
    }];

    if others_total > 0.0 {
        let stationary = (others_total / cost).sqrt() - others_total;
        if stationary > 0.0 && others_total + stationary < q {
            candidates.push(Candidate {
                kind: CandidateKind::InteriorBelow,
                hashrate: stationary,
                utility: deviation_utility(others_total, stationary, cost, params),
            });
        }
    }

    let to_kink = q - others_total;
    if to_kink >= 0.0 {
        candidates.push(Candidate {
            kind: CandidateKind::Boundary,
            hashrate: to_kink,
            utility: deviation_utility(others_total, to_kink, cost, params),
        });
    }

    if let Some(stationary) = above_q_stationary(others_total, cost, params) {
        candidates.push(Candidate {
            kind: CandidateKind::InteriorAbove,
            hashrate: stationary,
            utility: deviation_utility(others_total, stationary, cost, params),
        });
    }

    let mut best = candidates[0];
    for c in &candidates[1..] {
        if c.utility > best.utility {
            best = *c;
        }
    }
    let utility_supremum = if others_total == 0.0 {
        1.0
    } else {
        best.utility
    };
    BestResponseResult {
        best_hashrate: best.hashrate,
        best_utility: best.utility,
        utility_supremum,
        candidates,
    }
}

/// Solves the decayed-branch first-order condition
/// `(Q/H)^delta (H - (delta+1) q)/H^2 = c` with `H = H_-i + q` by bisection.
///
/// The left side is strictly decreasing in `q` wherever it is positive, so a
/// sign change brackets the unique stationary point. Returns `None` when the
/// branch has no interior optimum (the derivative is already non-positive on
/// entry).
fn above_q_stationary(others: f64, cost: f64, params: &RewardParams) -> Option<f64> {
    let q_threshold = params.q_threshold();
    let foc = |dev: f64| -> f64 {
        let h = others + dev;
        let (_, above) = model::derivative_pieces(h, dev, cost, params);
        above
    };

    let lo0 = (q_threshold - others).max(0.0);
    if foc(lo0) <= 0.0 {
        return None;
    }
    // expand until the derivative goes negative; it tends to -c as q grows
    let mut hi = 2.0 * lo0.max(q_threshold).max(1.0);
    let mut expansions = 0;
    while foc(hi) > 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return None; // cannot happen for valid inputs; refuse to spin
        }
    }
    let mut lo = lo0;
    for _ in 0..BISECT_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if foc(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECT_REL_TOL * hi {
            break;
        }
    }
    let root = 0.5 * (lo + hi);
    (root > lo0).then_some(root)
}

/// Default deviation span: twice the larger of the current total and `Q`.
pub fn default_span(profile: &HashrateProfile, params: &RewardParams) -> f64 {
    2.0 * profile.total().max(params.q_threshold())
}

/// Brute-force search over one miner's deviations on a uniform grid of
/// `steps + 1` points across `[0, span]`, plus the exact kink deviation and
/// the miner's current hashrate.
pub fn grid_oracle(
    profile: &HashrateProfile,
    miner: usize,
    costs: &CostProfile,
    params: &RewardParams,
    span: f64,
    steps: usize,
) -> Result<GridSearch> {
    if profile.len() != costs.miner_count() {
        return Err(Error::LengthMismatch {
            costs: costs.miner_count(),
            hashrates: profile.len(),
        });
    }
    if steps == 0 || !span.is_finite() || span <= 0.0 {
        return Err(Error::InvalidScenario(
            "grid oracle needs a positive span and at least one step",
        ));
    }
    let others = profile.others_total(miner);
    let cost = costs.cost(miner);

    let mut best = GridSearch {
        best_hashrate: 0.0,
        best_utility: 0.0,
    };
    let mut consider = |dev: f64| {
        let u = deviation_utility(others, dev, cost, params);
        if u > best.best_utility {
            best = GridSearch {
                best_hashrate: dev,
                best_utility: u,
            };
        }
    };
    for k in 0..=steps {
        consider(k as f64 * span / steps as f64);
    }
    let to_kink = params.q_threshold() - others;
    if to_kink >= 0.0 {
        consider(to_kink);
    }
    consider(profile.hashrate(miner));
    Ok(best)
}

/// Checks whether a profile is an epsilon-equilibrium.
///
/// Every miner must pass both the grid-oracle improvement bound and the
/// analytic sign conditions. Failures land in the report; `Err` is reserved
/// for malformed inputs.
pub fn verify_profile(
    profile: &HashrateProfile,
    costs: &CostProfile,
    params: &RewardParams,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    if profile.len() != costs.miner_count() {
        return Err(Error::LengthMismatch {
            costs: costs.miner_count(),
            hashrates: profile.len(),
        });
    }
    let span = options.span.unwrap_or_else(|| default_span(profile, params));
    let h = profile.total();
    let q = params.q_threshold();
    let kink_band = KINK_BAND * q;

    let mut checks = Vec::with_capacity(profile.len());
    let mut max_improvement = f64::NEG_INFINITY;
    let mut passed = true;
    for i in 0..profile.len() {
        let q_i = profile.hashrate(i);
        let u_i = current_utility(profile, i, costs, params)?;
        let oracle = grid_oracle(profile, i, costs, params, span, options.grid_steps)?;
        let improvement = oracle.best_utility - u_i;

        let derivative_ok = if h <= 0.0 {
            // an empty network is never stable: any entrant captures the
            // whole reward at infinitesimal cost
            false
        } else {
            let (below, above) = model::derivative_pieces(h, q_i, costs.cost(i), params);
            // away from the kink both one-sided derivatives coincide
            let (d_left, d_right) = if h < q - kink_band {
                (below, below)
            } else if h > q + kink_band {
                (above, above)
            } else {
                (below, above)
            };
            if q_i > 0.0 {
                d_left >= -options.eps && d_right <= options.eps
            } else {
                d_right <= options.eps
            }
        };

        if improvement > options.eps || !derivative_ok {
            passed = false;
        }
        max_improvement = max_improvement.max(improvement);
        checks.push(MinerCheck {
            miner: i,
            hashrate: q_i,
            utility: u_i,
            improvement,
            derivative_ok,
            participant: q_i > 0.0,
        });
    }
    Ok(VerificationReport {
        passed,
        eps: options.eps,
        max_improvement,
        checks,
    })
}

/// Verifies the point selected by a solved equilibrium.
pub fn verify_equilibrium(
    equilibrium: &Equilibrium,
    costs: &CostProfile,
    params: &RewardParams,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    let profile = HashrateProfile::new(equilibrium.hashrates.clone())?;
    verify_profile(&profile, costs, params, options)
}

/// Runs best-response dynamics from an initial profile.
///
/// Each iteration moves one miner (per `order`) to their exact best response.
/// After every full sweep of `m` updates the remaining per-miner improvement
/// is measured; the run stops once it drops to `tol` or the iteration budget
/// is spent. Non-convergence is reported, not an error.
pub fn best_response_dynamics(
    initial: &HashrateProfile,
    costs: &CostProfile,
    params: &RewardParams,
    order: UpdateOrder,
    max_iters: usize,
    tol: f64,
) -> Result<DynamicsTrace> {
    if initial.len() != costs.miner_count() {
        return Err(Error::LengthMismatch {
            costs: costs.miner_count(),
            hashrates: initial.len(),
        });
    }
    let m = initial.len();
    let mut rng = match order {
        UpdateOrder::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        UpdateOrder::RoundRobin => None,
    };

    let mut profile = initial.clone();
    let mut iterates = vec![profile.clone()];
    let mut converged = false;
    let mut final_gap = f64::INFINITY;
    let mut iterations = 0;

    while iterations < max_iters {
        let miner = match &mut rng {
            Some(rng) => rng.gen_range(0..m),
            None => iterations % m,
        };
        let br = best_response(profile.others_total(miner), costs.cost(miner), params);
        profile = profile.with_hashrate(miner, br.best_hashrate)?;
        iterates.push(profile.clone());
        iterations += 1;

        if iterations % m == 0 {
            let gap = improvement_gap(&profile, costs, params)?;
            if gap <= tol {
                converged = true;
                final_gap = gap;
                break;
            }
        }
    }
    if !converged {
        final_gap = improvement_gap(&profile, costs, params)?;
        converged = final_gap <= tol;
    }
    Ok(DynamicsTrace {
        iterates,
        converged,
        final_gap,
        iterations,
    })
}

/// Max utility improvement any single miner can realize from `profile`,
/// measured against the deviation-utility supremum so that states with a
/// lone active miner (whose best response does not exist) never register as
/// converged.
fn improvement_gap(
    profile: &HashrateProfile,
    costs: &CostProfile,
    params: &RewardParams,
) -> Result<f64> {
    let mut gap: f64 = 0.0;
    for i in 0..profile.len() {
        let br = best_response(profile.others_total(i), costs.cost(i), params);
        let u = current_utility(profile, i, costs, params)?;
        gap = gap.max(br.utility_supremum - u);
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_equilibrium, solve_equilibrium_with, Regime, SelectionPolicy};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(q: f64, delta: f64) -> RewardParams {
        RewardParams::new(q, delta).unwrap()
    }

    #[test]
    fn best_response_flat_branch_stationary() {
        // opposing total 1, flat reward everywhere (huge Q), cost 1/4:
        // q* = sqrt(1/0.25) - 1 = 1, utility 1/2 - 1/4 = 1/4
        let br = best_response(1.0, 0.25, &params(1e9, 0.0));
        assert_eq!(br.best_hashrate, 1.0);
        assert_relative_eq!(br.best_utility, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn best_response_non_participation() {
        // entry derivative Q^delta / H_-i^(delta+1) - c <= 0 keeps the miner out
        let br = best_response(2.0, 0.3, &params(1.0, 1.0));
        assert_eq!(br.best_hashrate, 0.0);
        assert_eq!(br.best_utility, 0.0);
        // decayed-branch stationary point exists when cheap enough
        let br = best_response(2.0, 0.1, &params(1.0, 1.0));
        assert!(br.best_hashrate > 0.0);
    }

    #[test]
    fn best_response_kink_beats_flat_stationary() {
        // six ladder miners at the static point hold 0.6451374; a seventh
        // with cost 0.5 under Q = 1, delta = 1 prefers stopping at the kink
        // to the (infeasible) flat stationary point
        let others = 0.6451374;
        let br = best_response(others, 0.5, &params(1.0, 1.0));
        let kink = 1.0 - others;
        assert_relative_eq!(br.best_hashrate, kink, epsilon = 1e-12);
        assert_relative_eq!(br.best_utility, 0.1774313, epsilon = 1e-6);
        assert!(br
            .candidates
            .iter()
            .all(|c| c.kind != CandidateKind::InteriorBelow));
    }

    #[test]
    fn best_response_with_empty_network() {
        // no opponents: utility climbs toward 1 as the hashrate vanishes, so
        // only the supremum is reportable; the attained candidates are
        // staying out or stopping at the kink
        let br = best_response(0.0, 0.9, &params(1.0, 1.0));
        assert_eq!(br.best_hashrate, 1.0);
        assert_relative_eq!(br.best_utility, 0.1, epsilon = 1e-15);
        assert_eq!(br.utility_supremum, 1.0);
        // too expensive to bother with any attainable point, but shaving the
        // hashrate toward zero still approaches the full reward
        let br = best_response(0.0, 1.2, &params(1.0, 1.0));
        assert_eq!(br.best_hashrate, 0.0);
        assert_eq!(br.utility_supremum, 1.0);
        // with opponents present the supremum is attained
        let br = best_response(1.0, 0.25, &params(1e9, 0.0));
        assert_eq!(br.utility_supremum, br.best_utility);
    }

    #[test]
    fn best_response_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let others: f64 = rng.gen_range(0.0..4.0);
            let cost = rng.gen_range(0.05..1.5);
            let p = params(rng.gen_range(0.2..4.0), rng.gen_range(0.0..4.0));
            let br = best_response(others, cost, &p);

            let span = 2.0 * (others + 1.0).max(p.q_threshold());
            let steps = 20_000;
            let mut grid_best = 0.0f64;
            for k in 0..=steps {
                let dev = k as f64 * span / steps as f64;
                grid_best = grid_best.max(deviation_utility(others, dev, cost, &p));
            }
            assert!(
                br.best_utility >= grid_best - 1e-7,
                "analytic best {} below grid best {grid_best} (others {others}, cost {cost})",
                br.best_utility
            );
        }
    }

    #[test]
    fn grid_oracle_confirms_solver_and_flags_perturbations() {
        let costs = CostProfile::new(vec![0.3, 0.5, 0.9]).unwrap();
        let p = params(5.0, 0.0);
        let eq = solve_equilibrium(&costs, &p).unwrap();
        let profile = HashrateProfile::new(eq.hashrates.clone()).unwrap();
        let span = default_span(&profile, &p);

        for i in 0..3 {
            let oracle = grid_oracle(&profile, i, &costs, &p, span, 4000).unwrap();
            let u = current_utility(&profile, i, &costs, &p).unwrap();
            assert!(oracle.best_utility - u <= 1e-6);
        }

        // inflate one miner: the oracle must find a strict improvement
        let perturbed = profile
            .with_hashrate(0, profile.hashrate(0) * 1.5)
            .unwrap();
        let oracle = grid_oracle(&perturbed, 0, &costs, &p, span, 4000).unwrap();
        let u = current_utility(&perturbed, 0, &costs, &p).unwrap();
        assert!(oracle.best_utility - u > 1e-4);
    }

    #[test]
    fn verify_accepts_solver_output_across_regimes() {
        let cases = [
            (vec![0.9; 4], 1.0, 1.0),    // BelowQ
            (vec![0.1, 0.8], 1.0, 1.0),  // AtQ
            (vec![0.2; 6], 1.0, 1.0),    // AboveQ
        ];
        for (costs, q, delta) in cases {
            let costs = CostProfile::new(costs).unwrap();
            let p = params(q, delta);
            for policy in [SelectionPolicy::Canonical, SelectionPolicy::Utilitarian] {
                let eq = solve_equilibrium_with(&costs, &p, policy).unwrap();
                let report =
                    verify_equilibrium(&eq, &costs, &p, &VerifyOptions::default()).unwrap();
                assert!(
                    report.passed,
                    "verification failed in {:?}: max improvement {}",
                    eq.regime, report.max_improvement
                );
            }
        }
    }

    #[test]
    fn verify_rejects_non_equilibrium() {
        let costs = CostProfile::new(vec![0.9; 4]).unwrap();
        let p = params(1.0, 1.0);
        let eq = solve_equilibrium(&costs, &p).unwrap();
        let mut rates = eq.hashrates.clone();
        rates[0] *= 2.0;
        let profile = HashrateProfile::new(rates).unwrap();
        let report = verify_profile(&profile, &costs, &p, &VerifyOptions::default()).unwrap();
        assert!(!report.passed);
        assert!(report.max_improvement > 1e-6 || !report.checks[0].derivative_ok);
    }

    #[test]
    fn verify_rejects_empty_network() {
        let costs = CostProfile::new(vec![0.9; 3]).unwrap();
        let p = params(1.0, 1.0);
        let profile = HashrateProfile::new(vec![0.0; 3]).unwrap();
        let report = verify_profile(&profile, &costs, &p, &VerifyOptions::default()).unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn dynamics_fixed_point_does_not_move() {
        let costs = CostProfile::new(vec![0.9; 4]).unwrap();
        let p = params(1.0, 1.0);
        let eq = solve_equilibrium(&costs, &p).unwrap();
        let start = HashrateProfile::new(eq.hashrates.clone()).unwrap();
        let trace =
            best_response_dynamics(&start, &costs, &p, UpdateOrder::RoundRobin, 100, 1e-9)
                .unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations, 4); // one sweep
        for it in &trace.iterates {
            for (a, b) in it.rates().iter().zip(start.rates()) {
                assert!((a - b).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn dynamics_from_zero_converges() {
        let costs = CostProfile::new(vec![0.9; 4]).unwrap();
        let p = params(1.0, 1.0);
        let start = HashrateProfile::new(vec![0.0; 4]).unwrap();
        // near the optimum the utility is quadratically flat, so a gap of
        // 1e-14 pins the hashrates to about 1e-7
        let trace =
            best_response_dynamics(&start, &costs, &p, UpdateOrder::RoundRobin, 500, 1e-14)
                .unwrap();
        assert!(trace.converged, "gap {}", trace.final_gap);
        let expect = 3.0 / (16.0 * 0.9);
        for &q in trace.final_profile().rates() {
            assert_relative_eq!(q, expect, epsilon = 1e-6);
        }
    }

    #[test]
    fn dynamics_random_order_is_reproducible() {
        let costs = CostProfile::new(vec![0.5, 0.7, 0.9]).unwrap();
        let p = params(1.0, 1.0);
        let start = HashrateProfile::new(vec![0.0; 3]).unwrap();
        let order = UpdateOrder::Random { seed: 42 };
        let a = best_response_dynamics(&start, &costs, &p, order, 200, 1e-10).unwrap();
        let b = best_response_dynamics(&start, &costs, &p, order, 200, 1e-10).unwrap();
        assert_eq!(a.iterates.len(), b.iterates.len());
        for (x, y) in a.iterates.iter().zip(&b.iterates) {
            for (qa, qb) in x.rates().iter().zip(y.rates()) {
                assert_eq!(qa.to_bits(), qb.to_bits());
            }
        }
        // a different seed explores a different path
        let c = best_response_dynamics(
            &start,
            &costs,
            &p,
            UpdateOrder::Random { seed: 43 },
            200,
            1e-10,
        )
        .unwrap();
        assert!(
            a.iterates.len() != c.iterates.len()
                || a.iterates
                    .iter()
                    .zip(&c.iterates)
                    .any(|(x, y)| x.rates() != y.rates())
        );
    }

    #[test]
    fn dynamics_converges_to_equilibria_when_it_settles() {
        // Exact sequential best response is not a universally convergent
        // scheme here: two miners with sharply different costs can trap the
        // round-robin map in a small limit cycle (the product of the
        // response slopes at the fixed point dips below -1). Non-convergence
        // is therefore a legitimate reported outcome; what must hold is that
        // every run that does settle settles on an epsilon-equilibrium.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut converged_by_regime = [0usize; 3];
        let mut runs = 0usize;
        let mut settled = 0usize;
        for _ in 0..60 {
            let m = rng.gen_range(2..6);
            let costs: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.5)).collect();
            let costs = CostProfile::new(costs).unwrap();
            let p = params(rng.gen_range(0.3..3.0), rng.gen_range(0.0..3.0));
            let eq = solve_equilibrium(&costs, &p).unwrap();
            // a small positive seed; the all-zero profile is an artificial
            // fixed point when no single entrant profits at any fixed scale
            let start = HashrateProfile::new(vec![0.01 * p.q_threshold(); m]).unwrap();
            let trace =
                best_response_dynamics(&start, &costs, &p, UpdateOrder::RoundRobin, 2000, 1e-9)
                    .unwrap();
            runs += 1;
            if !trace.converged {
                continue;
            }
            settled += 1;
            converged_by_regime[match eq.regime {
                Regime::BelowQ => 0,
                Regime::AtQ => 1,
                Regime::AboveQ => 2,
            }] += 1;
            // the settled profile is an epsilon-equilibrium in gain terms (a
            // pinned-regime limit approached from below satisfies that long
            // before its derivatives become one-sided stationary, so the
            // stricter full certificate is reserved for exact solver output)
            let profile = trace.final_profile();
            let span = default_span(profile, &p);
            for i in 0..m {
                let oracle = grid_oracle(profile, i, &costs, &p, span, 2000).unwrap();
                let u = current_utility(profile, i, &costs, &p).unwrap();
                assert!(
                    oracle.best_utility - u <= 1e-5,
                    "miner {i} can still gain {}",
                    oracle.best_utility - u
                );
            }
        }
        assert!(
            settled * 2 > runs,
            "most runs should settle: {settled} of {runs}"
        );
        assert!(
            converged_by_regime.iter().all(|&n| n > 0),
            "settled regime coverage {converged_by_regime:?}"
        );
    }
}

