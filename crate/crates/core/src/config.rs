//! Umbrella run configuration: pipeline, simulator, and evaluation settings.

use crate::model::PipelineConfig;
use crate::sim::SimConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("pipeline: {0}")]
    Pipeline(#[from] crate::model::ModelError),
    #[error("sim: {0}")]
    Sim(#[from] crate::sim::SimError),
    #[error("{0}")]
    Cross(String),
}

/// Evaluation settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Episode length, seconds.
    pub horizon: f64,
    /// Score prediction error to entity boundaries instead of centers.
    pub boundary_error: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            horizon: 40.0,
            boundary_error: false,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(ConfigError::Cross("eval.horizon must be > 0".to_string()));
        }
        Ok(())
    }
}

/// Everything a run needs. Every key has a default, so an empty config is
/// a valid config.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub sim: SimConfig,
    pub eval: EvalConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.pipeline.validate()?;
        self.sim.validate()?;
        self.eval.validate()?;
        if (self.pipeline.max_ray - self.sim.max_ray).abs() > 1e-9 {
            return Err(ConfigError::Cross(format!(
                "pipeline.max_ray ({}) and sim.max_ray ({}) describe the same sensor and must match",
                self.pipeline.max_ray, self.sim.max_ray
            )));
        }
        Ok(())
    }
}
