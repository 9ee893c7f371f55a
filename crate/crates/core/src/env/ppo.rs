//! Training hyperparameters advertised to external trainers.

use serde::{Deserialize, Serialize};

/// Reference PPO configuration. Advisory only: nothing in this crate trains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpoDefaults {
    pub total_steps: u64,
    pub actors: u32,
    pub steps_per_episode: u32,
    pub steps_per_actor_batch: u32,
    pub clip_epsilon: f64,
    pub entropy_coefficient: f64,
    pub epochs: u32,
    pub step_size: f64,
    pub batch_size: u32,
    /// Discount for advantage estimation.
    pub gamma: f64,
    /// GAE parameter.
    pub lambda: f64,
    pub adam_epsilon: f64,
    /// Annealing of step size and clip range.
    pub schedule: String,
}

impl Default for PpoDefaults {
    fn default() -> Self {
        Self {
            total_steps: 40_000_000,
            actors: 32,
            steps_per_episode: 300,
            steps_per_actor_batch: 1200,
            clip_epsilon: 0.2,
            entropy_coefficient: 0.005,
            epochs: 5,
            step_size: 3e-4,
            batch_size: 64,
            gamma: 0.99,
            lambda: 0.95,
            adam_epsilon: 1e-5,
            schedule: "linear".into(),
        }
    }
}

impl PpoDefaults {
    /// Contents of `assets/ppo_defaults.json`.
    pub const JSON: &'static str = include_str!("../../assets/ppo_defaults.json");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asset_matches_default() {
        let parsed: PpoDefaults = serde_json::from_str(PpoDefaults::JSON).unwrap();
        assert_eq!(parsed, PpoDefaults::default());
    }
}
