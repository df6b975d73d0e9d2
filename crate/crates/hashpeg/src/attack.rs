//! Attack and revaluation analysis.
//!
//! Four questions about a deployed reward schedule, each answered by
//! comparing pre- and post-event equilibria:
//!
//! * **Entry** — how much hashrate does a newcomer bring against an
//!   incumbent network pinned at the reward threshold, and does a decay
//!   exponent shrink it?
//! * **Collusion** — do `k` of `m` identical miners profit from merging into
//!   one coordinated player?
//! * **Sybil** — does one miner profit from appearing as `k` independent
//!   identities, either at a fixed profile (never: allocation is linear in
//!   own hashrate) or after the market re-equilibrates?
//! * **Revaluation** — when the token's exchange value jumps by a factor
//!   `R`, effective costs fall to `c_i / R`; how does the equilibrium scale?

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, CostProfile, HashrateProfile, RevaluationFactor, RewardParams};
use crate::solver::{self, Equilibrium, Regime, Thresholds};

/// Strict-gain margin for "profitable" verdicts; differences inside this
/// band count as break-even.
pub const PROFITABILITY_MARGIN: f64 = 1e-12;

/// Relative width at which entry-point bisection stops.
const BISECT_REL_TOL: f64 = 1e-15;
const BISECT_MAX_ITERS: usize = 200;

// ---------------------------------------------------------------------------
// New-miner entry
// ---------------------------------------------------------------------------

/// A newcomer's optimal move against an incumbent network sitting exactly at
/// the reward threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewMinerEntry {
    /// Entrant hashrate, in units of the incumbent total.
    pub hashrate: f64,
    /// Entrant utility at that hashrate (same normalized units).
    pub utility: f64,
}

/// Utility of a newcomer playing `hashrate` against incumbents pinned at the
/// threshold, in normalized units (incumbent total = threshold = 1): every
/// unit the entrant adds pushes the system into the decayed branch, so
/// `u(q) = q / (1+q)^(delta+1) - c q`.
pub fn new_miner_utility(hashrate: f64, cost: f64, delta: f64) -> Result<f64> {
    validate_entry_inputs(cost, delta)?;
    if !hashrate.is_finite() || hashrate < 0.0 {
        return Err(Error::InvalidHashrates(
            "entrant hashrate must be finite and non-negative",
        ));
    }
    Ok(hashrate / powf_fast(1.0 + hashrate, delta + 1.0) - cost * hashrate)
}

/// Computes the newcomer's optimal hashrate and utility.
///
/// The first-order condition is `(1 - delta q) / (1+q)^(delta+2) = c`. For
/// `delta = 0` it has the closed form `q* = 1/sqrt(c) - 1`; otherwise the
/// left side falls strictly from `1 - c > 0` at `q = 0` to `-c` at
/// `q = 1/delta`, so bisection on that bracket pins the unique optimum.
/// Costs at or above 1 make entry unprofitable at any scale (`NoEntry`).
pub fn new_miner_optimum(cost: f64, delta: f64) -> Result<NewMinerEntry> {
    validate_entry_inputs(cost, delta)?;
    if cost >= 1.0 {
        return Err(Error::NoEntry(cost));
    }
    let hashrate = if delta == 0.0 {
        (1.0 / cost).sqrt() - 1.0
    } else {
        let foc = |q: f64| (1.0 - delta * q) / powf_fast(1.0 + q, delta + 2.0) - cost;
        let mut lo = 0.0;
        let mut hi = 1.0 / delta;
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
        0.5 * (lo + hi)
    };
    Ok(NewMinerEntry {
        hashrate,
        utility: new_miner_utility(hashrate, cost, delta)?,
    })
}

fn validate_entry_inputs(cost: f64, delta: f64) -> Result<()> {
    if !cost.is_finite() || cost <= 0.0 {
        return Err(Error::InvalidCosts("entry cost must be finite and positive"));
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::InvalidParams(
            "decay exponent must be finite and non-negative",
        ));
    }
    Ok(())
}

/// `base^exp` with an exact integer-power fast path (`delta = 0` entry
/// formulas then involve no transcendental rounding at all).
fn powf_fast(base: f64, exp: f64) -> f64 {
    if exp.fract() == 0.0 && (0.0..=64.0).contains(&exp) {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    }
}

// ---------------------------------------------------------------------------
// Collusion
// ---------------------------------------------------------------------------

/// A coalition of `coalition` miners out of `miners` identical ones.
///
/// The coalition acts as a single player, so the attacked market is the
/// homogeneous game with `miners - coalition + 1` players. Coalitions must
/// leave at least one outsider (`2 <= coalition <= miners - 1`): with every
/// miner inside there is no residual competition to model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollusionScenario {
    miners: usize,
    cost: f64,
    coalition: usize,
}

impl CollusionScenario {
    pub fn new(miners: usize, cost: f64, coalition: usize) -> Result<Self> {
        if !cost.is_finite() || cost <= 0.0 {
            return Err(Error::InvalidCosts(
                "per-miner cost must be finite and positive",
            ));
        }
        if miners < 3 {
            return Err(Error::InvalidScenario(
                "collusion needs at least three miners (coalition plus an outsider)",
            ));
        }
        if coalition < 2 || coalition > miners - 1 {
            return Err(Error::InvalidScenario(
                "coalition size must be between 2 and miners - 1",
            ));
        }
        Ok(Self {
            miners,
            cost,
            coalition,
        })
    }

    /// Builds the scenario from an explicit cost profile, which must be
    /// homogeneous (collusion among unequal miners has no single per-member
    /// baseline to compare against).
    pub fn from_profile(costs: &CostProfile, coalition: usize) -> Result<Self> {
        if !costs.is_homogeneous() {
            return Err(Error::HeterogeneousCosts);
        }
        Self::new(costs.miner_count(), costs.cost(0), coalition)
    }

    pub fn miners(&self) -> usize {
        self.miners
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn coalition(&self) -> usize {
        self.coalition
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollusionReport {
    pub miners: usize,
    pub coalition: usize,
    /// Per-miner equilibrium utility in the original `miners`-player game.
    pub baseline_utility: f64,
    /// The coalition's total utility as one player among
    /// `miners - coalition + 1`.
    pub coalition_utility: f64,
    /// `coalition_utility` split evenly across members.
    pub per_member_utility: f64,
    /// `per_member_utility - baseline_utility`.
    pub gain: f64,
    pub profitable: bool,
    pub baseline_regime: Regime,
    pub coalition_regime: Regime,
}

/// Compares per-member coalition utility against the honest baseline.
///
/// Both sides are full equilibrium solves: merging shrinks the player count,
/// which softens competition but also concentrates the reward share the
/// members must now split.
pub fn collusion_report(
    scenario: &CollusionScenario,
    params: &RewardParams,
) -> Result<CollusionReport> {
    let baseline = homogeneous_equilibrium(scenario.miners, scenario.cost, params)?;
    let residual_players = scenario.miners - scenario.coalition + 1;
    let attacked = homogeneous_equilibrium(residual_players, scenario.cost, params)?;

    let baseline_utility = baseline.utilities[0];
    let coalition_utility = attacked.utilities[0];
    let per_member_utility = coalition_utility / scenario.coalition as f64;
    let gain = per_member_utility - baseline_utility;
    Ok(CollusionReport {
        miners: scenario.miners,
        coalition: scenario.coalition,
        baseline_utility,
        coalition_utility,
        per_member_utility,
        gain,
        profitable: gain > PROFITABILITY_MARGIN,
        baseline_regime: baseline.regime,
        coalition_regime: attacked.regime,
    })
}

fn homogeneous_equilibrium(
    players: usize,
    cost: f64,
    params: &RewardParams,
) -> Result<Equilibrium> {
    let costs = CostProfile::new(vec![cost; players])?;
    solver::solve_equilibrium(&costs, params)
}

// ---------------------------------------------------------------------------
// Sybil identities
// ---------------------------------------------------------------------------

/// One of `miners` identical miners masquerading as `identities` independent
/// ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SybilScenario {
    miners: usize,
    cost: f64,
    identities: usize,
}

impl SybilScenario {
    pub fn new(miners: usize, cost: f64, identities: usize) -> Result<Self> {
        if !cost.is_finite() || cost <= 0.0 {
            return Err(Error::InvalidCosts(
                "per-miner cost must be finite and positive",
            ));
        }
        if miners < 2 {
            return Err(Error::InvalidScenario("sybil analysis needs at least two miners"));
        }
        if identities == 0 {
            return Err(Error::InvalidScenario("identity count must be positive"));
        }
        Ok(Self {
            miners,
            cost,
            identities,
        })
    }

    pub fn miners(&self) -> usize {
        self.miners
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn identities(&self) -> usize {
        self.identities
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SybilReport {
    pub miners: usize,
    pub identities: usize,
    /// Honest per-miner utility in the `miners`-player game.
    pub baseline_utility: f64,
    /// The attacker's total across their `identities` identities in the
    /// re-equilibrated `miners + identities - 1`-player game.
    pub attacker_utility: f64,
    /// Per-identity utility every honest miner is left with after the attack.
    pub honest_utility: f64,
    /// `attacker_utility - baseline_utility`.
    pub gain: f64,
    pub profitable: bool,
    pub baseline_regime: Regime,
    pub attack_regime: Regime,
}

/// Equilibrium-shift view of a sybil attack: the market re-equilibrates as
/// if `miners + identities - 1` independent equal-cost miners were present,
/// and the attacker pockets `identities` of the per-identity utilities.
///
/// Unlike the fixed-profile view ([`sybil_split_gain`]), this can genuinely
/// profit: extra apparent competitors push every identity to oversupply, and
/// the attacker collects the inflated aggregate.
pub fn sybil_report(scenario: &SybilScenario, params: &RewardParams) -> Result<SybilReport> {
    let (baseline_regime, baseline_utility) =
        homogeneous_closed_form(scenario.miners, scenario.cost, params)?;
    let players = scenario.miners + scenario.identities - 1;
    let (attack_regime, per_identity) = homogeneous_closed_form(players, scenario.cost, params)?;

    let k = scenario.identities as f64;
    let n = players as f64;
    // In the flat regime per-identity utility is 1/n^2, so the attacker's
    // total is computed as the single quotient k/n^2 rather than k * (1/n^2);
    // the two differ by at most one rounding and the quotient form is the one
    // the closed form actually states.
    let attacker_utility = match attack_regime {
        Regime::BelowQ => k / (n * n),
        _ => k * per_identity,
    };
    let gain = attacker_utility - baseline_utility;
    Ok(SybilReport {
        miners: scenario.miners,
        identities: scenario.identities,
        baseline_utility,
        attacker_utility,
        honest_utility: per_identity,
        gain,
        profitable: gain > PROFITABILITY_MARGIN,
        baseline_regime,
        attack_regime,
    })
}

/// Per-miner equilibrium utility of the homogeneous `players`-player game,
/// from the closed forms: `1/n^2` below the threshold, `(1 - cQ)/n` at it,
/// and `q (c† - c)` with `q = H/n` above it.
pub fn homogeneous_equilibrium_utility(
    players: usize,
    cost: f64,
    params: &RewardParams,
) -> Result<f64> {
    homogeneous_closed_form(players, cost, params).map(|(_, u)| u)
}

fn homogeneous_closed_form(
    players: usize,
    cost: f64,
    params: &RewardParams,
) -> Result<(Regime, f64)> {
    if players < 2 {
        return Err(Error::InvalidScenario(
            "homogeneous closed forms need at least two players",
        ));
    }
    if !cost.is_finite() || cost <= 0.0 {
        return Err(Error::InvalidCosts(
            "per-miner cost must be finite and positive",
        ));
    }
    let n = players as f64;
    let delta = params.delta();
    let c_star = n * cost / (n - 1.0);
    let c_dagger = (n > delta + 1.0).then(|| n * cost / (n - delta - 1.0));
    let regime = solver::regime_from_thresholds(c_star, c_dagger, params);
    let q_thr = params.q_threshold();
    let utility = match regime {
        Regime::BelowQ => 1.0 / (n * n),
        Regime::AtQ => (1.0 - cost * q_thr) / n,
        Regime::AboveQ => {
            let cd = c_dagger.expect("the decayed regime requires the upper threshold");
            let total = (q_thr.powf(delta) / cd).powf(1.0 / (delta + 1.0));
            total / n * (cd - cost)
        }
    };
    Ok((regime, utility))
}

/// Outcome of splitting one miner's fixed hashrate across several identities
/// while every other miner stands still.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SybilSplit {
    /// Utility of operating the hashrate as a single identity.
    pub combined_utility: f64,
    /// Total utility across the split identities — identical to
    /// `combined_utility`.
    pub split_utility: f64,
    /// Each identity's share of the utility, proportional to its weight.
    pub per_identity: Vec<f64>,
    /// Always exactly zero; see [`sybil_split_gain`].
    pub gain: f64,
}

/// Shows that splitting a fixed hashrate across identities changes nothing.
///
/// With the network total fixed, a miner controlling total hashrate `T` earns
/// `T * (r(H)/H - c)` no matter how many identities present it: allocation is
/// linear in own hashrate. Both sides of the comparison are evaluated through
/// that shared aggregate, so the reported gain is identically `0.0` — the
/// linearity argument, not a numerical coincidence. The per-identity
/// breakdown is reported for inspection; its naive sum reproduces
/// `split_utility` up to rounding.
pub fn sybil_split_gain(
    profile: &HashrateProfile,
    miner: usize,
    weights: &[f64],
    costs: &CostProfile,
    params: &RewardParams,
) -> Result<SybilSplit> {
    if profile.len() != costs.miner_count() {
        return Err(Error::LengthMismatch {
            costs: costs.miner_count(),
            hashrates: profile.len(),
        });
    }
    if miner >= profile.len() {
        return Err(Error::InvalidScenario("miner index out of range"));
    }
    if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(Error::InvalidScenario(
            "split weights must be non-empty, finite, and positive",
        ));
    }
    let own = profile.hashrate(miner);
    let total = profile.total();
    let per_unit = if own == 0.0 || total <= 0.0 {
        0.0
    } else {
        model::reward(total, params)? / total - costs.cost(miner)
    };
    let combined_utility = own * per_unit;
    let weight_sum: f64 = weights.iter().sum();
    let per_identity = weights
        .iter()
        .map(|w| (w / weight_sum * own) * per_unit)
        .collect();
    Ok(SybilSplit {
        combined_utility,
        split_utility: combined_utility,
        per_identity,
        gain: 0.0,
    })
}

// ---------------------------------------------------------------------------
// Token revaluation
// ---------------------------------------------------------------------------

/// How total hashrate responds to a token revaluation by factor `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingClass {
    /// Flat regime on both sides: hashrate scales by `R`.
    Linear,
    /// Decayed regime on both sides: hashrate scales by `R^(1/(delta+1))`.
    RootDeltaPlusOne,
    /// Pinned regime on both sides: hashrate stays at the threshold.
    Constant,
    /// The revaluation moved the market across a regime boundary; no single
    /// power law applies.
    Transitional,
}

impl std::fmt::Display for ScalingClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ScalingClass::Linear => "linear",
            ScalingClass::RootDeltaPlusOne => "root_delta_plus_one",
            ScalingClass::Constant => "constant",
            ScalingClass::Transitional => "transitional",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevaluationReport {
    pub factor: f64,
    pub baseline: Equilibrium,
    pub revalued: Equilibrium,
    pub scaling: ScalingClass,
    /// `revalued.total_hashrate / baseline.total_hashrate`.
    pub hashrate_ratio: f64,
    /// Revalued per-miner utilities restated in pre-revaluation value units
    /// (token utilities times `R`).
    pub value_utilities: Vec<f64>,
}

/// Re-solves the market after the token's value jumps by `factor`.
///
/// A miner paying `c_i` value-units per hash pays `c_i / R` token-units once
/// the token is worth `R` times more, so the revalued game is the same game
/// with scaled costs. Utilities come back in token units; `value_utilities`
/// converts them back for apples-to-apples comparison with the baseline.
pub fn revalue(
    costs: &CostProfile,
    params: &RewardParams,
    factor: RevaluationFactor,
) -> Result<RevaluationReport> {
    let r = factor.value();
    let baseline = solver::solve_equilibrium(costs, params)?;
    let scaled = CostProfile::new(costs.input().iter().map(|c| c / r).collect())?;
    let revalued = solver::solve_equilibrium(&scaled, params)?;

    let scaling = match (baseline.regime, revalued.regime) {
        (Regime::BelowQ, Regime::BelowQ) => ScalingClass::Linear,
        (Regime::AboveQ, Regime::AboveQ) => ScalingClass::RootDeltaPlusOne,
        (Regime::AtQ, Regime::AtQ) => ScalingClass::Constant,
        _ => ScalingClass::Transitional,
    };
    let hashrate_ratio = revalued.total_hashrate / baseline.total_hashrate;
    let value_utilities = revalued.utilities.iter().map(|u| r * u).collect();
    Ok(RevaluationReport {
        factor: r,
        baseline,
        revalued,
        scaling,
        hashrate_ratio,
        value_utilities,
    })
}

// ---------------------------------------------------------------------------
// Decay-exponent sweep
// ---------------------------------------------------------------------------

/// Relative market share of two miners at one equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairShare {
    /// Input index of the cheaper miner.
    pub cheaper: usize,
    /// Input index of the pricier miner.
    pub pricier: usize,
    /// Cheaper miner's share over the pricier miner's; at least 1.
    pub ratio: f64,
}

/// One point of a decay-exponent sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub delta: f64,
    pub thresholds: Thresholds,
    pub equilibrium: Equilibrium,
    /// Share ratios for every pair of participating miners with distinct
    /// costs, cheaper first.
    pub market_shares: Vec<PairShare>,
}

/// Solves the market across a grid of decay exponents.
///
/// Raising the exponent softens the reward's tail, which draws marginal
/// miners in: participant sets grow along the sweep while total hashrate and
/// cheap-over-pricey share ratios shrink toward parity.
pub fn delta_sweep(costs: &CostProfile, q_threshold: f64, deltas: &[f64]) -> Result<Vec<SweepEntry>> {
    if deltas.is_empty() {
        return Err(Error::InvalidSweep("the exponent grid is empty"));
    }
    // partial_cmp also rejects NaN entries, which break the ordering
    if deltas
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::InvalidSweep(
            "the exponent grid must be strictly increasing",
        ));
    }
    deltas
        .iter()
        .map(|&delta| {
            let params = RewardParams::new(q_threshold, delta)?;
            let thresholds = solver::thresholds(costs, &params)?;
            let equilibrium = solver::solve_equilibrium(costs, &params)?;
            let market_shares = participant_pair_shares(&equilibrium, costs)?;
            Ok(SweepEntry {
                delta,
                thresholds,
                equilibrium,
                market_shares,
            })
        })
        .collect()
}

fn participant_pair_shares(
    equilibrium: &Equilibrium,
    costs: &CostProfile,
) -> Result<Vec<PairShare>> {
    let m = costs.miner_count();
    let mut shares = Vec::new();
    // walk cost-sorted positions so `cheaper` really is cheaper
    for a in 0..m {
        for b in (a + 1)..m {
            let (i, j) = (costs.input_index(a), costs.input_index(b));
            match relative_market_share(equilibrium, costs, i, j) {
                Ok(ratio) => shares.push(PairShare {
                    cheaper: i,
                    pricier: j,
                    ratio,
                }),
                Err(Error::MarketShareUndefined(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(shares)
}

/// Share of miner `i`'s equilibrium hashrate relative to miner `j`'s.
///
/// In the point regimes this is `q_i / q_j`. In the pinned regime the point
/// is selection-dependent, so the ratio of interval upper endpoints — the
/// selection-free quantity — is used instead. Undefined (and an error) for
/// equal costs and for non-participants.
pub fn relative_market_share(
    equilibrium: &Equilibrium,
    costs: &CostProfile,
    i: usize,
    j: usize,
) -> Result<f64> {
    let m = costs.miner_count();
    if i >= m || j >= m || equilibrium.hashrates.len() != m {
        return Err(Error::InvalidScenario("miner index out of range"));
    }
    if i == j || costs.cost(i) == costs.cost(j) {
        return Err(Error::MarketShareUndefined(
            "share ratios need two distinct costs",
        ));
    }
    let (top, bottom) = match &equilibrium.intervals {
        Some(intervals) => (intervals[i].hi, intervals[j].hi),
        None => (equilibrium.hashrates[i], equilibrium.hashrates[j]),
    };
    if top <= 0.0 || bottom <= 0.0 {
        return Err(Error::MarketShareUndefined(
            "share ratios need both miners participating",
        ));
    }
    Ok(top / bottom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_equilibrium;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(q: f64, delta: f64) -> RewardParams {
        RewardParams::new(q, delta).unwrap()
    }

    fn ladder(m: usize) -> CostProfile {
        CostProfile::new((1..=m).map(|i| i as f64 / (i + 1) as f64).collect()).unwrap()
    }

    // -- entry ---------------------------------------------------------

    #[test]
    fn entry_closed_form_flat_decay() {
        let entry = new_miner_optimum(0.25, 0.0).unwrap();
        assert_eq!(entry.hashrate, 1.0); // 1/sqrt(1/4) - 1, all exact
        assert_eq!(entry.utility, 0.25); // 1/2 - 1/4
    }

    #[test]
    fn entry_rejected_at_high_cost() {
        assert_eq!(new_miner_optimum(1.0, 1.0), Err(Error::NoEntry(1.0)));
        assert_eq!(new_miner_optimum(1.7, 0.0), Err(Error::NoEntry(1.7)));
        assert!(new_miner_optimum(-0.2, 0.0).is_err());
        assert!(new_miner_utility(1.0, 0.5, -1.0).is_err());
        assert!(new_miner_utility(f64::NAN, 0.5, 1.0).is_err());
    }

    #[test]
    fn entry_satisfies_first_order_condition() {
        for (cost, delta) in [(0.25, 1.0), (0.1, 2.0), (0.6, 0.5), (0.9, 4.0)] {
            let entry = new_miner_optimum(cost, delta).unwrap();
            assert!(entry.hashrate > 0.0 && entry.hashrate < 1.0 / delta);
            let foc = (1.0 - delta * entry.hashrate)
                / (1.0 + entry.hashrate).powf(delta + 2.0)
                - cost;
            assert!(foc.abs() < 1e-12, "foc residual {foc}");
            // interior maximum: neighbors are worse
            let h = 1e-6;
            let u = entry.utility;
            assert!(u >= new_miner_utility(entry.hashrate - h, cost, delta).unwrap());
            assert!(u >= new_miner_utility(entry.hashrate + h, cost, delta).unwrap());
            assert!(u > 0.0, "entry below cost 1 is always worth taking");
        }
    }

    #[test]
    fn entry_shrinks_with_decay_and_cost() {
        // harsher decay deters the entrant
        let mut last = f64::INFINITY;
        for delta in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let entry = new_miner_optimum(0.25, delta).unwrap();
            assert!(entry.hashrate < last);
            last = entry.hashrate;
        }
        // so does a higher cost
        let mut last = f64::INFINITY;
        for cost in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let entry = new_miner_optimum(cost, 1.0).unwrap();
            assert!(entry.hashrate < last);
            last = entry.hashrate;
        }
    }

    proptest! {
        #[test]
        fn entry_optimum_beats_grid(
            cost in 0.02f64..0.98,
            delta in 0.0f64..6.0,
        ) {
            let entry = new_miner_optimum(cost, delta).unwrap();
            let span = if delta > 0.0 { 1.0 / delta } else { 4.0 / cost };
            for k in 0..=400usize {
                let q = k as f64 * span / 400.0;
                let u = new_miner_utility(q, cost, delta).unwrap();
                prop_assert!(entry.utility >= u - 1e-9);
            }
        }
    }

    // -- collusion -----------------------------------------------------

    #[test]
    fn collusion_scenario_validation() {
        assert!(CollusionScenario::new(10, 0.95, 1).is_err());
        assert!(CollusionScenario::new(10, 0.95, 10).is_err());
        assert!(CollusionScenario::new(2, 0.95, 2).is_err());
        assert!(CollusionScenario::new(10, 0.0, 5).is_err());
        assert!(CollusionScenario::new(10, 0.95, 9).is_ok());

        let hetero = CostProfile::new(vec![0.5, 0.9, 0.9]).unwrap();
        assert_eq!(
            CollusionScenario::from_profile(&hetero, 2),
            Err(Error::HeterogeneousCosts)
        );
        let homog = CostProfile::new(vec![0.9; 10]).unwrap();
        let s = CollusionScenario::from_profile(&homog, 4).unwrap();
        assert_eq!((s.miners(), s.coalition()), (10, 4));
    }

    #[test]
    fn collusion_turns_profitable_at_eight_of_ten() {
        // ten miners at cost 0.95 under a flat-regime market: merging k of
        // them leaves n = 11 - k players each earning 1/n^2, so per-member
        // pay is 1/((11-k)^2 k), first beating the honest 1/100 at k = 8
        let p = params(1.0, 0.0);
        for k in 2..=9 {
            let report =
                collusion_report(&CollusionScenario::new(10, 0.95, k).unwrap(), &p).unwrap();
            assert_eq!(report.baseline_regime, Regime::BelowQ);
            assert_eq!(report.coalition_regime, Regime::BelowQ);
            assert_relative_eq!(report.baseline_utility, 0.01, epsilon = 1e-12);
            let n = (11 - k) as f64;
            assert_relative_eq!(
                report.per_member_utility,
                1.0 / (n * n * k as f64),
                epsilon = 1e-12
            );
            assert_eq!(report.profitable, k >= 8, "k = {k}");
        }
        let at_eight =
            collusion_report(&CollusionScenario::new(10, 0.95, 8).unwrap(), &p).unwrap();
        assert_relative_eq!(at_eight.per_member_utility, 1.0 / 72.0, epsilon = 1e-12);
    }

    #[test]
    fn collusion_unprofitable_across_twenty_miner_markets() {
        // three markets in three regimes; small coalitions never profit
        let cases = [
            (0.99, params(1.0, 0.0), Regime::BelowQ),
            (0.93, params(1.0, 1.0), Regime::AtQ),
            (0.5, params(1.0, 1.0), Regime::AboveQ),
        ];
        for (cost, p, regime) in cases {
            for k in 2..=10 {
                let report =
                    collusion_report(&CollusionScenario::new(20, cost, k).unwrap(), &p).unwrap();
                assert_eq!(report.baseline_regime, regime);
                assert!(
                    !report.profitable,
                    "cost {cost}, k = {k}: gain {}",
                    report.gain
                );
            }
        }
    }

    #[test]
    fn collusion_can_change_the_regime() {
        // at cost 0.93 the pinned 20-miner market stays pinned while the
        // residual game keeps 15+ players (k <= 6), then goes flat
        let p = params(1.0, 1.0);
        for k in 2..=10 {
            let report =
                collusion_report(&CollusionScenario::new(20, 0.93, k).unwrap(), &p).unwrap();
            let expect = if k <= 6 { Regime::AtQ } else { Regime::BelowQ };
            assert_eq!(report.coalition_regime, expect, "k = {k}");
        }
    }

    // -- sybil ---------------------------------------------------------

    #[test]
    fn homogeneous_closed_forms_match_solver() {
        let cases = [
            (4, 0.9, params(1.0, 1.0)),   // BelowQ
            (20, 0.93, params(1.0, 1.0)), // AtQ
            (6, 0.2, params(1.0, 1.0)),   // AboveQ
            (5, 0.5, params(10.0, 0.0)),  // BelowQ, larger threshold
        ];
        for (n, cost, p) in cases {
            let closed = homogeneous_equilibrium_utility(n, cost, &p).unwrap();
            let eq = solve_equilibrium(&CostProfile::new(vec![cost; n]).unwrap(), &p).unwrap();
            assert_relative_eq!(closed, eq.utilities[0], epsilon = 1e-12);
        }
        assert!(homogeneous_equilibrium_utility(1, 0.5, &params(1.0, 0.0)).is_err());
    }

    #[test]
    fn sybil_identities_pay_off_in_the_flat_regime() {
        // five miners at cost 0.5 under a distant threshold: k identities
        // against the re-equilibrated market earn k/(4+k)^2, best at k = 4
        let p = params(10.0, 0.0);
        let mut best = (0usize, f64::MIN);
        for k in 1..=10 {
            let report =
                sybil_report(&SybilScenario::new(5, 0.5, k).unwrap(), &p).unwrap();
            assert_eq!(report.baseline_regime, Regime::BelowQ);
            assert_eq!(report.attack_regime, Regime::BelowQ);
            let n = (4 + k) as f64;
            assert_eq!(report.attacker_utility, k as f64 / (n * n), "k = {k}");
            assert_eq!(report.profitable, k > 1, "k = {k}");
            if report.attacker_utility > best.1 {
                best = (k, report.attacker_utility);
            }
        }
        assert_eq!(best.0, 4);
        assert_eq!(best.1, 4.0 / 64.0);

        // a single identity is the honest baseline itself
        let honest = sybil_report(&SybilScenario::new(5, 0.5, 1).unwrap(), &p).unwrap();
        assert_eq!(honest.gain, 0.0);
        assert!(!honest.profitable);
    }

    #[test]
    fn sybil_gain_fades_in_the_pinned_regime() {
        // a pinned market splits the same fixed reward across more
        // identities: k of n earn k(1 - cQ)/n, still improving on 1/m of it,
        // but the regime caps the upside compared to the flat case
        let p = params(1.0, 1.0);
        let report = sybil_report(&SybilScenario::new(20, 0.93, 3).unwrap(), &p).unwrap();
        assert_eq!(report.baseline_regime, Regime::AtQ);
        assert_eq!(report.attack_regime, Regime::AtQ);
        assert_relative_eq!(report.baseline_utility, 0.07 / 20.0, epsilon = 1e-12);
        assert_relative_eq!(report.attacker_utility, 3.0 * 0.07 / 22.0, epsilon = 1e-12);
        assert!(report.profitable);
    }

    #[test]
    fn fixed_profile_split_gains_nothing() {
        let costs = CostProfile::new(vec![0.3, 0.5, 0.9]).unwrap();
        let p = params(1.0, 1.0);
        let eq = solve_equilibrium(&costs, &p).unwrap();
        let profile = HashrateProfile::new(eq.hashrates.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let parts = rng.gen_range(2..6);
            let weights: Vec<f64> = (0..parts).map(|_| rng.gen_range(0.01..5.0)).collect();
            let miner = rng.gen_range(0..3);
            let split = sybil_split_gain(&profile, miner, &weights, &costs, &p).unwrap();
            assert_eq!(split.gain, 0.0);
            assert_eq!(split.split_utility, split.combined_utility);
            let naive: f64 = split.per_identity.iter().sum();
            assert_relative_eq!(naive, split.split_utility, epsilon = 1e-12);
        }
    }

    #[test]
    fn split_validation() {
        let costs = CostProfile::new(vec![0.3, 0.5]).unwrap();
        let p = params(1.0, 0.0);
        let profile = HashrateProfile::new(vec![0.4, 0.2]).unwrap();
        assert!(sybil_split_gain(&profile, 0, &[], &costs, &p).is_err());
        assert!(sybil_split_gain(&profile, 0, &[1.0, -1.0], &costs, &p).is_err());
        assert!(sybil_split_gain(&profile, 5, &[1.0], &costs, &p).is_err());
        // an idle miner splits into idle identities
        let idle = HashrateProfile::new(vec![0.0, 0.2]).unwrap();
        let split = sybil_split_gain(&idle, 0, &[1.0, 2.0], &costs, &p).unwrap();
        assert_eq!(split.combined_utility, 0.0);
        assert_eq!(split.gain, 0.0);
    }

    // -- revaluation ---------------------------------------------------

    #[test]
    fn revaluation_scales_flat_markets_linearly() {
        let costs = CostProfile::new(vec![0.5, 0.8, 1.1]).unwrap();
        let p = params(10.0, 0.0);
        for r in [1.5, 2.0, 4.0] {
            let report = revalue(&costs, &p, RevaluationFactor::new(r).unwrap()).unwrap();
            assert_eq!(report.scaling, ScalingClass::Linear);
            assert_relative_eq!(report.hashrate_ratio, r, epsilon = 1e-9);
            for (vu, tu) in report.value_utilities.iter().zip(&report.revalued.utilities) {
                assert_eq!(*vu, r * tu);
            }
        }
    }

    #[test]
    fn revaluation_scales_decayed_markets_by_the_root() {
        let costs = ladder(40);
        let p = params(1.0, 1.0);
        for r in [2.0, 4.0] {
            let report = revalue(&costs, &p, RevaluationFactor::new(r).unwrap()).unwrap();
            assert_eq!(report.scaling, ScalingClass::RootDeltaPlusOne);
            assert_relative_eq!(report.hashrate_ratio, r.sqrt(), epsilon = 1e-9);
        }
    }

    #[test]
    fn revaluation_leaves_pinned_markets_pinned() {
        let costs = CostProfile::new(vec![0.1, 0.8]).unwrap();
        let p = params(1.0, 1.0);
        let report = revalue(&costs, &p, RevaluationFactor::new(1.05).unwrap()).unwrap();
        assert_eq!(report.scaling, ScalingClass::Constant);
        assert_eq!(report.hashrate_ratio, 1.0);
    }

    #[test]
    fn revaluation_can_cross_regimes() {
        // flat at baseline, decayed after a 2x revaluation
        let costs = CostProfile::new(vec![0.9; 4]).unwrap();
        let p = params(1.0, 1.0);
        let report = revalue(&costs, &p, RevaluationFactor::new(2.0).unwrap()).unwrap();
        assert_eq!(report.baseline.regime, Regime::BelowQ);
        assert_eq!(report.revalued.regime, Regime::AboveQ);
        assert_eq!(report.scaling, ScalingClass::Transitional);
    }

    #[test]
    fn revaluation_never_sheds_participants() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let m = rng.gen_range(2..12);
            let costs: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..2.0)).collect();
            let costs = CostProfile::new(costs).unwrap();
            let p = params(rng.gen_range(0.2..5.0), rng.gen_range(0.0..3.0));
            let r = rng.gen_range(1.0..8.0);
            let report = revalue(&costs, &p, RevaluationFactor::new(r).unwrap()).unwrap();
            for i in &report.baseline.participants {
                assert!(
                    report.revalued.participants.contains(i),
                    "miner {i} dropped out after a {r}x revaluation"
                );
            }
        }
    }

    // -- sweep ---------------------------------------------------------

    #[test]
    fn sweep_validates_its_grid() {
        let costs = ladder(5);
        assert!(delta_sweep(&costs, 1.0, &[]).is_err());
        assert!(delta_sweep(&costs, 1.0, &[1.0, 1.0]).is_err());
        assert!(delta_sweep(&costs, 1.0, &[2.0, 1.0]).is_err());
        assert!(delta_sweep(&costs, 1.0, &[0.0, -1.0]).is_err());
    }

    #[test]
    fn sweep_draws_in_marginal_miners() {
        // the 40-step cost ladder under a unit threshold: 7 participants at
        // no decay, 25 once the exponent reaches 1
        let costs = ladder(40);
        let entries = delta_sweep(&costs, 1.0, &[0.0, 1.0]).unwrap();
        assert_eq!(entries[0].equilibrium.participants.len(), 7);
        assert_eq!(entries[1].equilibrium.participants.len(), 25);
        // the lower threshold is decay-independent
        assert_eq!(entries[0].thresholds.c_star, entries[1].thresholds.c_star);
        // decay softens concentration: every shared pair's ratio shrinks
        for s0 in &entries[0].market_shares {
            assert!(s0.ratio >= 1.0);
            if let Some(s1) = entries[1]
                .market_shares
                .iter()
                .find(|s| s.cheaper == s0.cheaper && s.pricier == s0.pricier)
            {
                assert!(s1.ratio <= s0.ratio + 1e-9);
            }
        }
    }

    #[test]
    fn share_ratio_follows_threshold_distances() {
        let costs = ladder(40);
        let p = params(1.0, 1.0);
        let eq = solve_equilibrium(&costs, &p).unwrap();
        let t = solver::thresholds(&costs, &p).unwrap();
        let cd = t.c_dagger.unwrap();
        let ratio = relative_market_share(&eq, &costs, 0, 1).unwrap();
        let expect = (cd - costs.cost(0)) / (cd - costs.cost(1));
        assert_relative_eq!(ratio, expect, epsilon = 1e-12);
    }

    #[test]
    fn share_ratio_rejects_degenerate_pairs() {
        let costs = CostProfile::new(vec![0.5, 0.5, 0.9, 5.0]).unwrap();
        let p = params(1.0, 0.0);
        let eq = solve_equilibrium(&costs, &p).unwrap();
        assert!(matches!(
            relative_market_share(&eq, &costs, 0, 1),
            Err(Error::MarketShareUndefined(_))
        ));
        assert!(matches!(
            relative_market_share(&eq, &costs, 0, 3), // cost 5 sits out
            Err(Error::MarketShareUndefined(_))
        ));
        assert!(relative_market_share(&eq, &costs, 0, 9).is_err());
    }

    #[test]
    fn share_ratio_uses_intervals_when_pinned() {
        let costs = CostProfile::new(vec![0.1, 0.8]).unwrap();
        let p = params(1.0, 1.0);
        let eq = solve_equilibrium(&costs, &p).unwrap();
        // upper endpoints (1 - c_i)/(1 - c_j) = 0.9/0.2, independent of the
        // selected point
        assert_relative_eq!(
            relative_market_share(&eq, &costs, 0, 1).unwrap(),
            4.5,
            epsilon = 1e-12
        );
    }

    proptest! {
        #[test]
        fn sybil_single_identity_is_always_break_even(
            m in 2usize..30,
            cost in 0.05f64..1.5,
            q in 0.2f64..5.0,
            delta in 0.0f64..4.0,
        ) {
            let p = params(q, delta);
            let report = sybil_report(&SybilScenario::new(m, cost, 1).unwrap(), &p).unwrap();
            prop_assert_eq!(report.gain, 0.0);
            prop_assert!(!report.profitable);
        }
    }
}
