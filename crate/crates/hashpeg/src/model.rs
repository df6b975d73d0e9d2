//! Reward, allocation, and utility primitives for the hashrate-pegged
//! proportional reward family.
//!
//! The protocol dispenses a per-block reward of `min(1, (Q/H)^delta)` where
//! `H` is the total system hashrate, `Q > 0` is the hashrate threshold at
//! which the reward starts to decay, and `delta >= 0` is the decay exponent.
//! The reward is split among miners in proportion to their hashrate, and each
//! miner pays a linear cost per unit of hashrate.
//!
//! `delta = 0` collapses the family to the static proportional model; the
//! formulas below are written so that this collapse is bit-for-bit exact
//! through the same code path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-unit hashrate costs of the miner population.
///
/// Costs are kept sorted non-decreasing internally (all closed forms index
/// miners by cost rank), together with the permutation back to the caller's
/// input order so every public result can be reported in input order. The
/// sort is stable, so equal costs keep their input order.
#[derive(Debug, Clone, PartialEq)]
pub struct CostProfile {
    input: Vec<f64>,
    sorted: Vec<f64>,
    /// `order[k]` = input index of the k-th smallest cost.
    order: Vec<usize>,
}

impl CostProfile {
    /// Builds a profile from per-unit costs in any order.
    ///
    /// Requires at least two miners (the participation equation X(c) = 1 is
    /// degenerate for a monopolist) and strictly positive, finite costs: a
    /// zero-cost miner would demand unbounded hashrate in every regime.
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        if costs.len() < 2 {
            return Err(Error::InvalidCosts("at least two miners are required"));
        }
        if costs.iter().any(|c| !c.is_finite() || *c <= 0.0) {
            return Err(Error::InvalidCosts(
                "every cost must be finite and strictly positive",
            ));
        }
        let mut order: Vec<usize> = (0..costs.len()).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
        let sorted = order.iter().map(|&i| costs[i]).collect();
        Ok(Self {
            input: costs,
            sorted,
            order,
        })
    }

    /// Number of miners `m`.
    pub fn miner_count(&self) -> usize {
        self.input.len()
    }

    /// Cost of a miner, indexed in input order.
    ///
    /// Panics if `miner >= miner_count()`.
    pub fn cost(&self, miner: usize) -> f64 {
        self.input[miner]
    }

    /// Costs in the caller's original order.
    pub fn input(&self) -> &[f64] {
        &self.input
    }

    /// Costs sorted non-decreasing.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Input index of the miner at a sorted position.
    pub fn input_index(&self, sorted_pos: usize) -> usize {
        self.order[sorted_pos]
    }

    /// Scatters one value per sorted position back into input order.
    pub fn to_input_order(&self, sorted_values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(sorted_values.len(), self.order.len());
        let mut out = vec![0.0; sorted_values.len()];
        for (pos, &value) in sorted_values.iter().enumerate() {
            out[self.order[pos]] = value;
        }
        out
    }

    /// True when every miner has the same cost.
    pub fn is_homogeneous(&self) -> bool {
        self.sorted.first() == self.sorted.last()
    }
}

/// Parameters of the reward rule `r(H) = min(1, (Q/H)^delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    q_threshold: f64,
    delta: f64,
}

impl RewardParams {
    /// Requires `q_threshold > 0` and `delta >= 0`, both finite.
    pub fn new(q_threshold: f64, delta: f64) -> Result<Self> {
        if !q_threshold.is_finite() || q_threshold <= 0.0 {
            return Err(Error::InvalidParams(
                "hashrate threshold Q must be finite and positive",
            ));
        }
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidParams(
                "decay exponent delta must be finite and non-negative",
            ));
        }
        Ok(Self { q_threshold, delta })
    }

    /// Hashrate threshold `Q` where the reward starts to decay.
    pub fn q_threshold(&self) -> f64 {
        self.q_threshold
    }

    /// Decay exponent `delta`.
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// A hashrate assignment, one entry per miner, in input order.
///
/// The cached total is always the deterministic left-to-right sum of the
/// entries, so identical profiles always report identical totals.
#[derive(Debug, Clone, PartialEq)]
pub struct HashrateProfile {
    rates: Vec<f64>,
    total: f64,
}

impl HashrateProfile {
    /// Requires non-negative, finite entries (an all-zero profile is valid).
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::InvalidHashrates("profile must not be empty"));
        }
        if rates.iter().any(|q| !q.is_finite() || *q < 0.0) {
            return Err(Error::InvalidHashrates(
                "every hashrate must be finite and non-negative",
            ));
        }
        let total = rates.iter().sum();
        Ok(Self { rates, total })
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Hashrate of a miner, indexed in input order.
    ///
    /// Panics if `miner >= len()`.
    pub fn hashrate(&self, miner: usize) -> f64 {
        self.rates[miner]
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Total system hashrate `H` (left-to-right sum of the entries).
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Returns a copy with one miner's hashrate replaced.
    pub fn with_hashrate(&self, miner: usize, hashrate: f64) -> Result<Self> {
        let mut rates = self.rates.clone();
        rates[miner] = hashrate;
        Self::new(rates)
    }

    /// Sum of everyone's hashrate except `miner`'s, accumulated
    /// left-to-right (more accurate than `total - q_i` when entries differ
    /// wildly in magnitude).
    pub fn others_total(&self, miner: usize) -> f64 {
        self.rates
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != miner)
            .map(|(_, q)| *q)
            .sum()
    }
}

/// A currency revaluation factor `R > 0`: every miner's real cost per unit
/// hashrate becomes `c_i / R` when the coin's value is multiplied by `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RevaluationFactor(f64);

impl RevaluationFactor {
    pub fn new(factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor <= 0.0 {
            return Err(Error::InvalidRevaluation(factor));
        }
        Ok(Self(factor))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Which one-sided derivative to evaluate at the reward kink `H = Q`.
///
/// Away from the kink the utility is differentiable and the side is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Total reward dispensed at system hashrate `total_hashrate`.
///
/// Equals `1` for `H <= Q` and `(Q/H)^delta` above; always in `(0, 1]`.
pub fn reward(total_hashrate: f64, params: &RewardParams) -> Result<f64> {
    if !total_hashrate.is_finite() || total_hashrate <= 0.0 {
        return Err(Error::NonPositiveHashrate);
    }
    if total_hashrate <= params.q_threshold() {
        Ok(1.0)
    } else {
        Ok((params.q_threshold() / total_hashrate).powf(params.delta()))
    }
}

/// Share of the block reward earned by one miner: `x_i = (q_i / H) * r(H)`.
pub fn allocation(profile: &HashrateProfile, miner: usize, params: &RewardParams) -> Result<f64> {
    let h = profile.total();
    let r = reward(h, params)?;
    Ok(profile.hashrate(miner) / h * r)
}

/// Net payoff of one miner: `U_i = x_i - c_i * q_i`.
pub fn utility(
    profile: &HashrateProfile,
    miner: usize,
    costs: &CostProfile,
    params: &RewardParams,
) -> Result<f64> {
    check_lengths(profile, costs)?;
    let x = allocation(profile, miner, params)?;
    Ok(x - costs.cost(miner) * profile.hashrate(miner))
}

/// Derivative of a miner's utility with respect to their own hashrate,
/// holding everyone else fixed.
///
/// Returns `(H - q_i)/H^2 - c_i` when `H < Q` and
/// `(Q/H)^delta * (H - (delta+1) q_i)/H^2 - c_i` when `H > Q`. The utility
/// has a kink at `H = Q`; there, `side` picks the left or right one-sided
/// derivative.
pub fn utility_derivative(
    profile: &HashrateProfile,
    miner: usize,
    costs: &CostProfile,
    params: &RewardParams,
    side: Side,
) -> Result<f64> {
    check_lengths(profile, costs)?;
    let h = profile.total();
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::NonPositiveHashrate);
    }
    let (below, above) =
        derivative_pieces(h, profile.hashrate(miner), costs.cost(miner), params);
    let q = params.q_threshold();
    Ok(if h < q {
        below
    } else if h > q {
        above
    } else {
        match side {
            Side::Left => below,
            Side::Right => above,
        }
    })
}

/// Both derivative branches at a point, regardless of which side of the kink
/// `h` falls on. Written so `delta = 0` makes the branches bit-identical:
/// `(Q/h)^0` is exactly `1.0` and multiplying by `(0 + 1)` is exact.
pub(crate) fn derivative_pieces(
    h: f64,
    q_i: f64,
    cost: f64,
    params: &RewardParams,
) -> (f64, f64) {
    let below = (h - q_i) / (h * h) - cost;
    let decay = (params.q_threshold() / h).powf(params.delta());
    let above = decay * (h - (params.delta() + 1.0) * q_i) / (h * h) - cost;
    (below, above)
}

/// Aggregate participation `X(c) = sum_i max(1 - c_i/c, 0)`.
///
/// `X` is non-decreasing in `c`, approaches the miner count as `c -> inf`,
/// and its crossings with `1` and `delta + 1` are the cost thresholds that
/// determine the equilibrium regime.
pub fn aggregate_x(costs: &CostProfile, c: f64) -> Result<f64> {
    // partial_cmp also rejects a NaN evaluation point
    if c.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::NonPositiveThresholdPoint);
    }
    let mut x = 0.0;
    for &cost in costs.sorted() {
        let term = 1.0 - cost / c;
        if term > 0.0 {
            x += term;
        } else {
            // costs are sorted, so every later term is also clamped to zero
            break;
        }
    }
    Ok(x)
}

fn check_lengths(profile: &HashrateProfile, costs: &CostProfile) -> Result<()> {
    if profile.len() != costs.miner_count() {
        return Err(Error::LengthMismatch {
            costs: costs.miner_count(),
            hashrates: profile.len(),
        });
    }
    Ok(())
}
