//! TOML run configuration. Every section and key is optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::pipeline::{CrossDbConfig, ScreeningConfig};
use crate::robustness::DEFAULT_THRESHOLD;
use crate::splice::SpliceConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessConfig {
    pub threshold: f64,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        Self { threshold: DEFAULT_THRESHOLD }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub features: FeatureConfig,
    pub splice: SpliceConfig,
    pub screening: ScreeningConfig,
    pub robustness: RobustnessConfig,
    pub crossdb: CrossDbConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Validation(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
    }
}
