use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use truelearn_core::semantic::PropagationConfig;
use truelearn_core::truelearn::ModelConfig;

/// Settings for `analyze`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Two session topics are adjacent when their relatedness exceeds this.
    pub edge_threshold: f64,
    /// Longest prefix covered by the recall-by-event series.
    pub max_event_index: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            edge_threshold: 0.0,
            max_event_index: 100,
        }
    }
}

/// Contents of a `--config` TOML file. Missing tables and keys take defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub propagation: PropagationConfig,
    pub analysis: AnalysisConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.model.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}
