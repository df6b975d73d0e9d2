//! Closed-form equilibrium solver.
//!
//! Pure-strategy equilibria of the hashrate-pegged reward game come in three
//! regimes, keyed by how the cost thresholds `c*` (where aggregate
//! participation X(c) crosses 1) and `c†` (where it crosses `delta + 1`)
//! compare against `1/Q`:
//!
//! * `BelowQ` — `c* > 1/Q`: the reward is still flat at equilibrium; the
//!   total hashrate is `1/c*` and each participant plays
//!   `(1/c*)(1 - c_i/c*)`.
//! * `AtQ` — `c* <= 1/Q <= c†` (or `c* <= 1/Q` with too few miners for `c†`
//!   to exist): the total pins to `Q` exactly and each participant may sit
//!   anywhere in a per-miner interval, subject to the totals summing to `Q`.
//! * `AboveQ` — `c† < 1/Q`: the decayed branch is active; the total is
//!   `(Q^delta / c†)^(1/(delta+1))` and shares are proportional to
//!   `1 - c_i/c†`.
//!
//! All closed forms index miners by cost rank internally; results are
//! reported in the caller's input order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, CostProfile, HashrateProfile, RewardParams};

/// Classification half-width at the regime boundaries: thresholds within this
/// distance of `1/Q` resolve to `AtQ`, the closed regime (its interval system
/// is feasible on the boundary, so this is the safe side to land on).
pub const REGIME_BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Which equilibrium regime a scenario falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    BelowQ,
    AtQ,
    AboveQ,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::BelowQ => "BelowQ",
            Regime::AtQ => "AtQ",
            Regime::AboveQ => "AboveQ",
        };
        f.write_str(s)
    }
}

/// A solution of `X(c) = target` together with the resulting participant
/// count (the number of miners with cost strictly below the crossing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCrossing {
    pub value: f64,
    pub participants: usize,
}

/// The two cost thresholds governing regime selection.
///
/// `c_dagger` is absent when `m <= delta + 1`: with that few miners the
/// participation aggregate never reaches `delta + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub c_star: f64,
    pub n_star: usize,
    pub c_dagger: Option<f64>,
    pub n_dagger: Option<usize>,
}

/// Per-miner equilibrium hashrate interval (degenerate `lo == hi` for
/// non-participants and for `delta = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// How to pick a point from the `AtQ` interval system. No selection is
/// game-theoretically privileged; both are exposed and verified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Single interpolation parameter `lambda` applied to every interval:
    /// `q_i = lo_i + lambda (hi_i - lo_i)` with `lambda` chosen so the total
    /// is exactly the target. Symmetric across equal-cost miners.
    Canonical,
    /// Lexicographically maximizes the hashrate of the lowest-cost miners:
    /// cheapest-first greedy fill to the upper bounds.
    Utilitarian,
}

/// A solved equilibrium, reported in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub regime: Regime,
    /// Total system hashrate: `1/c*`, exactly `Q`, or
    /// `(Q^delta/c†)^(1/(delta+1))` by regime.
    pub total_hashrate: f64,
    /// The equilibrium point (for `AtQ`, the selected point).
    pub hashrates: Vec<f64>,
    /// Per-miner equilibrium intervals; present only in the `AtQ` regime.
    pub intervals: Option<Vec<Interval>>,
    /// Which selection produced `hashrates` (only for `AtQ`).
    pub selection: Option<SelectionPolicy>,
    /// Input indices of miners with positive equilibrium hashrate, ascending.
    pub participants: Vec<usize>,
    /// Per-miner utility at `hashrates`.
    pub utilities: Vec<f64>,
}

/// The static (`delta = 0`) benchmark equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticEquilibrium {
    pub c_star: f64,
    pub total_hashrate: f64,
    pub hashrates: Vec<f64>,
    pub participants: Vec<usize>,
    pub utilities: Vec<f64>,
}

/// Solves `X(c) = target` in closed form.
///
/// On each candidate participant count `n`, the clamp pattern of `X` is fixed
/// and the crossing would be `c = (sum of the n smallest costs)/(n - target)`;
/// the candidate is accepted when that value is consistent with the pattern,
/// i.e. `c_n < c <= c_(n+1)` (with `c_(m+1) = +inf`). Exactly one candidate
/// is consistent. Requires `target >= 1` and strictly more miners than
/// `target`, otherwise `NoThreshold`.
pub fn solve_threshold(costs: &CostProfile, target: f64) -> Result<ThresholdCrossing> {
    if !target.is_finite() || target < 1.0 {
        return Err(Error::InvalidTarget(target));
    }
    let m = costs.miner_count();
    if (m as f64) <= target {
        return Err(Error::NoThreshold { target, miners: m });
    }
    let sorted = costs.sorted();
    let first = target.floor() as usize + 1;

    let mut prefix: f64 = sorted[..first - 1].iter().sum();
    let mut fallback: Option<(f64, ThresholdCrossing)> = None;
    for n in first..=m {
        prefix += sorted[n - 1];
        let candidate = prefix / (n as f64 - target);
        let lower = sorted[n - 1];
        let upper = if n < m { sorted[n] } else { f64::INFINITY };
        if candidate > lower && candidate <= upper {
            return Ok(ThresholdCrossing {
                value: candidate,
                participants: n,
            });
        }
        // Exact arithmetic always accepts exactly one candidate; keep the
        // least-violating one as a rounding-robust fallback.
        let violation = (lower - candidate).max(candidate - upper).max(0.0);
        if fallback.as_ref().is_none_or(|(v, _)| violation < *v) {
            fallback = Some((
                violation,
                ThresholdCrossing {
                    value: candidate,
                    participants: n,
                },
            ));
        }
    }
    match fallback {
        Some((violation, crossing)) if violation <= 1e-9 * crossing.value.abs() => Ok(crossing),
        _ => Err(Error::ThresholdSearchFailed),
    }
}

/// Computes both thresholds for a scenario.
pub fn thresholds(costs: &CostProfile, params: &RewardParams) -> Result<Thresholds> {
    let star = solve_threshold(costs, 1.0)?;
    let dagger = match solve_threshold(costs, params.delta() + 1.0) {
        Ok(crossing) => Some(crossing),
        Err(Error::NoThreshold { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(Thresholds {
        c_star: star.value,
        n_star: star.participants,
        c_dagger: dagger.map(|d| d.value),
        n_dagger: dagger.map(|d| d.participants),
    })
}

/// Determines the equilibrium regime from the thresholds.
pub fn classify_regime(costs: &CostProfile, params: &RewardParams) -> Result<(Regime, Thresholds)> {
    let th = thresholds(costs, params)?;
    let regime = regime_from_thresholds(th.c_star, th.c_dagger, params);
    Ok((regime, th))
}

pub(crate) fn regime_from_thresholds(
    c_star: f64,
    c_dagger: Option<f64>,
    params: &RewardParams,
) -> Regime {
    let inv_q = 1.0 / params.q_threshold();
    if c_star > inv_q + REGIME_BOUNDARY_TOLERANCE {
        Regime::BelowQ
    } else {
        match c_dagger {
            Some(cd) if cd < inv_q - REGIME_BOUNDARY_TOLERANCE => Regime::AboveQ,
            _ => Regime::AtQ,
        }
    }
}

/// Solves for the equilibrium with the canonical `AtQ` selection.
pub fn solve_equilibrium(costs: &CostProfile, params: &RewardParams) -> Result<Equilibrium> {
    solve_equilibrium_with(costs, params, SelectionPolicy::Canonical)
}

/// Solves for the equilibrium, choosing the `AtQ` point with `selection`
/// (point regimes ignore the policy).
pub fn solve_equilibrium_with(
    costs: &CostProfile,
    params: &RewardParams,
    selection: SelectionPolicy,
) -> Result<Equilibrium> {
    let (regime, th) = classify_regime(costs, params)?;
    match regime {
        Regime::BelowQ => {
            let total = 1.0 / th.c_star;
            point_equilibrium(costs, params, Regime::BelowQ, th.c_star, total, total)
        }
        Regime::AboveQ => {
            let c_dagger = th
                .c_dagger
                .expect("AboveQ classification implies c_dagger exists");
            let total = (params.q_threshold().powf(params.delta()) / c_dagger)
                .powf(1.0 / (params.delta() + 1.0));
            let scale = total / (params.delta() + 1.0);
            point_equilibrium(costs, params, Regime::AboveQ, c_dagger, total, scale)
        }
        Regime::AtQ => at_q_equilibrium(costs, params, selection),
    }
}

/// Point-regime construction: `q_i = scale * max(1 - c_i/bound, 0)`, shared
/// by `BelowQ`, `AboveQ`, and the static benchmark so that coinciding cases
/// produce bit-identical results.
fn point_equilibrium(
    costs: &CostProfile,
    params: &RewardParams,
    regime: Regime,
    bound: f64,
    total: f64,
    scale: f64,
) -> Result<Equilibrium> {
    let (hashrates, participants) = proportional_shares(costs, bound, scale);
    let utilities = point_utilities(&hashrates, costs, params)?;
    Ok(Equilibrium {
        regime,
        total_hashrate: total,
        hashrates,
        intervals: None,
        selection: None,
        participants,
        utilities,
    })
}

/// Shares `scale * max(1 - c_i/bound, 0)` in input order, plus the input
/// indices of the strict participants `{i : c_i < bound}`, ascending.
fn proportional_shares(costs: &CostProfile, bound: f64, scale: f64) -> (Vec<f64>, Vec<usize>) {
    let sorted: Vec<f64> = costs
        .sorted()
        .iter()
        .map(|&c| scale * (1.0 - c / bound).max(0.0))
        .collect();
    let mut participants: Vec<usize> = costs
        .sorted()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c < bound)
        .map(|(pos, _)| costs.input_index(pos))
        .collect();
    participants.sort_unstable();
    (costs.to_input_order(&sorted), participants)
}

fn point_utilities(
    hashrates: &[f64],
    costs: &CostProfile,
    params: &RewardParams,
) -> Result<Vec<f64>> {
    let profile = HashrateProfile::new(hashrates.to_vec())?;
    (0..profile.len())
        .map(|i| model::utility(&profile, i, costs, params))
        .collect()
}

fn at_q_equilibrium(
    costs: &CostProfile,
    params: &RewardParams,
    selection: SelectionPolicy,
) -> Result<Equilibrium> {
    let q = params.q_threshold();
    let inv_q = 1.0 / q;
    let delta = params.delta();

    // Per-miner interval, sorted order: a participant may sit anywhere in
    // [(Q - c_i Q^2)/(delta+1), Q - c_i Q^2]; cost exactly 1/Q does not
    // participate.
    let intervals_sorted: Vec<Interval> = costs
        .sorted()
        .iter()
        .map(|&c| {
            if c < inv_q {
                let hi = q - c * q * q;
                Interval {
                    lo: hi / (delta + 1.0),
                    hi,
                }
            } else {
                Interval { lo: 0.0, hi: 0.0 }
            }
        })
        .collect();

    let point_sorted = match selection {
        SelectionPolicy::Canonical => canonical_point(&intervals_sorted, q)?,
        SelectionPolicy::Utilitarian => utilitarian_point(&intervals_sorted, q)?,
    };

    let mut participants: Vec<usize> = costs
        .sorted()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c < inv_q)
        .map(|(pos, _)| costs.input_index(pos))
        .collect();
    participants.sort_unstable();

    let hashrates = costs.to_input_order(&point_sorted);
    let intervals = {
        let mut out = vec![Interval { lo: 0.0, hi: 0.0 }; intervals_sorted.len()];
        for (pos, iv) in intervals_sorted.iter().enumerate() {
            out[costs.input_index(pos)] = *iv;
        }
        out
    };
    let utilities = point_utilities(&hashrates, costs, params)?;

    Ok(Equilibrium {
        regime: Regime::AtQ,
        // the regime's defining property: the system pins to the threshold
        total_hashrate: q,
        hashrates,
        intervals: Some(intervals),
        selection: Some(selection),
        participants,
        utilities,
    })
}

/// Feasibility slack for interval selections, relative to the target total.
/// Regime classification tolerates thresholds within 1e-12 of `1/Q`, which
/// can push the interval system out of feasibility by a comparable hair.
const SELECTION_SLACK: f64 = 1e-9;

/// Picks the canonical point from an interval system: one interpolation
/// parameter `lambda = (target - sum lo)/(sum hi - sum lo)` applied to every
/// interval. Errors if the bounds do not bracket the target (beyond a small
/// numerical slack).
pub fn canonical_point(intervals: &[Interval], target: f64) -> Result<Vec<f64>> {
    let sum_lo: f64 = intervals.iter().map(|iv| iv.lo).sum();
    let sum_hi: f64 = intervals.iter().map(|iv| iv.hi).sum();
    let span = sum_hi - sum_lo;
    let slack = SELECTION_SLACK * target.abs().max(1.0);

    let lambda = if span > 0.0 {
        (target - sum_lo) / span
    } else {
        // degenerate system (delta = 0): the point is forced
        if (sum_lo - target).abs() > slack {
            return Err(Error::InfeasibleIntervals {
                sum_lo,
                sum_hi,
                target,
            });
        }
        0.0
    };
    if !(-SELECTION_SLACK..=1.0 + SELECTION_SLACK).contains(&lambda) {
        return Err(Error::InfeasibleIntervals {
            sum_lo,
            sum_hi,
            target,
        });
    }
    let lambda = lambda.clamp(0.0, 1.0);
    Ok(intervals
        .iter()
        .map(|iv| iv.lo + lambda * (iv.hi - iv.lo))
        .collect())
}

/// Picks the point that lexicographically maximizes earlier entries: fills
/// each interval to its upper bound in order while the remaining budget
/// allows. Callers pass intervals in ascending cost order to favor low-cost
/// miners.
pub fn utilitarian_point(intervals: &[Interval], target: f64) -> Result<Vec<f64>> {
    let sum_lo: f64 = intervals.iter().map(|iv| iv.lo).sum();
    let sum_hi: f64 = intervals.iter().map(|iv| iv.hi).sum();
    let slack = SELECTION_SLACK * target.abs().max(1.0);
    if target < sum_lo - slack || target > sum_hi + slack {
        return Err(Error::InfeasibleIntervals {
            sum_lo,
            sum_hi,
            target,
        });
    }
    let mut remaining = (target - sum_lo).max(0.0);
    let out = intervals
        .iter()
        .map(|iv| {
            let width = (iv.hi - iv.lo).max(0.0);
            let take = width.min(remaining);
            remaining -= take;
            iv.lo + take
        })
        .collect();
    Ok(out)
}

/// Solves the static proportional benchmark (`delta = 0`, flat reward).
///
/// Shares the `BelowQ` code path, so a hashrate-pegged solve with `delta = 0`
/// and `Q` above the static total reproduces this result exactly.
pub fn solve_static(costs: &CostProfile) -> Result<StaticEquilibrium> {
    let star = solve_threshold(costs, 1.0)?;
    let total = 1.0 / star.value;
    let (hashrates, participants) = proportional_shares(costs, star.value, total);
    // a flat reward is the pegged reward with an unreachable threshold
    let flat = RewardParams::new(f64::MAX, 0.0)?;
    let utilities = point_utilities(&hashrates, costs, &flat)?;
    Ok(StaticEquilibrium {
        c_star: star.value,
        total_hashrate: total,
        hashrates,
        participants,
        utilities,
    })
}
