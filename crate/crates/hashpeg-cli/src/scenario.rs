//! Scenario files: the JSON input format shared by the market subcommands.

use std::fs;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use hashpeg::{CostProfile, RewardParams};
use serde::{Deserialize, Serialize};

/// A market description loaded from a JSON file.
///
/// ```json
/// { "costs": [0.1, 0.8], "Q": 1.0, "delta": 1.0, "labels": ["us", "eu"] }
/// ```
///
/// `labels` is optional and purely cosmetic; unknown fields are rejected so
/// a typo'd key fails loudly instead of being ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Per-miner marginal cost, in input order.
    pub costs: Vec<f64>,
    /// Hashrate threshold where the pegged reward stops paying in full.
    #[serde(rename = "Q")]
    pub q_threshold: f64,
    /// Reward decay exponent past the threshold.
    pub delta: f64,
    /// Optional display names, parallel to `costs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl Scenario {
    /// Reads and validates a scenario file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        let scenario: Scenario = serde_json::from_str(&text)
            .with_context(|| format!("parsing scenario {}", path.display()))?;
        if let Some(labels) = &scenario.labels {
            ensure!(
                labels.len() == scenario.costs.len(),
                "scenario has {} labels for {} costs",
                labels.len(),
                scenario.costs.len()
            );
        }
        Ok(scenario)
    }

    /// Converts to the validated model inputs.
    pub fn to_model(&self) -> Result<(CostProfile, RewardParams)> {
        let costs = CostProfile::new(self.costs.clone())?;
        let params = RewardParams::new(self.q_threshold, self.delta)?;
        Ok((costs, params))
    }
}
