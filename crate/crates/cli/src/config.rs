//! Flat TOML run configuration. Every key is optional; values given on the
//! command line take precedence, and missing keys fall back to built-in
//! defaults.

use std::path::Path;

use anyhow::{Context, Result};
use cpo_core::medium::{MediumConfig, MediumParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gamma0_hz: Option<f64>,
    pub gamma_opt_hz: Option<f64>,
    pub gamma_t_hz: Option<f64>,
    pub coupling_density: Option<f64>,
    pub length_m: Option<f64>,
    pub zeeman_shift_hz: Option<f64>,

    pub gamma_ratio: Option<f64>,
    pub optical_depth: Option<f64>,
    pub s_per_watt: Option<f64>,
    pub residual_transmission: Option<f64>,
    pub pump_depth: Option<f64>,

    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub n_trajectories: Option<usize>,
    pub spatial_steps: Option<usize>,
    pub delta_model: Option<String>,
    pub propagator: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    fn medium_overrides(&self) -> MediumConfig {
        MediumConfig {
            gamma0_hz: self.gamma0_hz,
            gamma_opt_hz: self.gamma_opt_hz,
            gamma_t_hz: self.gamma_t_hz,
            coupling_density: self.coupling_density,
            length_m: self.length_m,
            zeeman_shift_hz: self.zeeman_shift_hz,
        }
    }

    /// `base` with any medium keys from this config applied.
    pub fn medium(&self, base: MediumParams) -> Result<MediumParams> {
        Ok(self.medium_overrides().apply_to(base)?)
    }
}
