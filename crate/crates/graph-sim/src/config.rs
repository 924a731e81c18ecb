//! Run configuration: one TOML document carrying every tunable of the
//! pipeline. Unknown keys are rejected, flags override file values, and the
//! canonical serialized form is hashed into checkpoints and run manifests.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{ClusteringMode, ClusteringParams};
use crate::graph::GraphConfig;
use crate::model::{ModelConfig, TrainConfig};
use crate::scene::{PreEventRange, SpeedDefinition};
use crate::synthetic::LaneLayout;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config value: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowConfig {
    pub length: usize,
    pub stride: usize,
    pub pre_event_min_seconds: f64,
    pub pre_event_max_seconds: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            length: 5,
            stride: 2,
            pre_event_min_seconds: 1.0,
            pre_event_max_seconds: 2.0,
        }
    }
}

impl WindowConfig {
    pub fn pre_event(&self) -> PreEventRange {
        PreEventRange {
            min_seconds: self.pre_event_min_seconds,
            max_seconds: self.pre_event_max_seconds,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub train_ratio: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_ratio: 0.7,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub scenario: SyntheticScenario,
    pub pedestrians: usize,
    pub seed: u64,
    pub lane_layout: LaneLayout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticScenario {
    #[default]
    Separable,
    DirectionalGroup,
    Mixed,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            scenario: SyntheticScenario::Separable,
            pedestrians: 200,
            seed: 7,
            lane_layout: LaneLayout::StraightRoad,
        }
    }
}

/// The complete run configuration. Defaults follow the reference values
/// (thresholds 0.2/2/2 m-per-unit, eps 1.5/10/5 m, d_thresh 20 m, window
/// 5 @ stride 2, lr 2e-6, batch 16, 10 epochs, 70/30 split).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub speed_definition: SpeedDefinition,
    pub clustering_mode: ClusteringMode,
    pub clustering: ClusteringParams,
    pub graph: GraphConfig,
    pub window: WindowConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub split: SplitConfig,
    pub synthetic: SyntheticConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.clustering
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.window.length < 2 {
            return Err(ConfigError::Invalid("window.length must be >= 2".into()));
        }
        if self.window.stride == 0 {
            return Err(ConfigError::Invalid("window.stride must be >= 1".into()));
        }
        if self.train.learning_rate <= 0.0 {
            return Err(ConfigError::Invalid("train.learning_rate must be > 0".into()));
        }
        if self.train.batch_size == 0 {
            return Err(ConfigError::Invalid("train.batch_size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.split.train_ratio) {
            return Err(ConfigError::Invalid(
                "split.train_ratio must lie in (0, 1)".into(),
            ));
        }
        if self.graph.d_thresh <= 0.0 {
            return Err(ConfigError::Invalid("graph.d_thresh must be > 0".into()));
        }
        self.model
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    /// FNV-1a hash of the canonical TOML form; embedded in checkpoints and
    /// run manifests so artifacts are traceable to their configuration.
    pub fn hash(&self) -> u64 {
        fnv1a(self.to_toml().as_bytes())
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_carry_reference_values() {
        let config = RunConfig::default();
        assert_eq!(config.clustering.pedestrian_speed_threshold, 0.2);
        assert_eq!(config.clustering.vehicle_eps, 10.0);
        assert_eq!(config.clustering.min_pts, 1);
        assert_eq!(config.graph.d_thresh, 20.0);
        assert_eq!(config.window.length, 5);
        assert_eq!(config.window.stride, 2);
        assert_eq!(config.train.learning_rate, 2e-6);
        assert_eq!(config.train.batch_size, 16);
        assert_eq!(config.train.epochs, 10);
        assert_eq!(config.model.graph_output, 512);
        assert_eq!(config.model.graph_lstm_hidden, 256);
        assert_eq!(config.split.train_ratio, 0.7);
        assert_eq!(config.speed_definition, SpeedDefinition::PaperLiteral);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml("totally_unknown_key = 1").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
        let err = RunConfig::from_toml("[train]\nlearning_rate = 0.1\nbogus = 2").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }

    #[test]
    fn roundtrip_and_hash_stability() {
        let config = RunConfig::default();
        let text = config.to_toml();
        let parsed = RunConfig::from_toml(&text).unwrap();
        assert_eq!(config.hash(), parsed.hash());

        let mut changed = RunConfig::default();
        changed.train.seed += 1;
        assert_ne!(config.hash(), changed.hash());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut config = RunConfig::default();
        config.train.learning_rate = 0.0;
        assert!(config.validate().is_err());

        let mut config = RunConfig::default();
        config.window.length = 1;
        assert!(config.validate().is_err());
    }
}
