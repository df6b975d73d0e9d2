//! Shared instance generators for the benchmark suite.

use hashpeg::{CostProfile, RewardParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A reproducible random market: `m` costs in `(0.05, 2.0)`, a threshold in
/// `(0.2, 5.0)`, and a decay exponent in `[0, 4)`.
pub fn random_market(m: usize, seed: u64) -> (CostProfile, RewardParams) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let costs: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..2.0)).collect();
    let params = RewardParams::new(rng.gen_range(0.2..5.0), rng.gen_range(0.0..4.0)).unwrap();
    (CostProfile::new(costs).unwrap(), params)
}
