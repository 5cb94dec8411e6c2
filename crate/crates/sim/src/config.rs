//! Scenario configuration files (TOML).
//!
//! Every key is optional and falls back to the defaults of
//! [`ScenarioConfig`]. Unknown keys are rejected.
//!
//! ```toml
//! num_users = 8
//! num_antennas = 8
//! tau_sq = 0.4
//! num_covs = 4
//! azimuth_start = -1.5707963267948966
//! azimuth_step = 1.0471975511965976
//! spread = 0.5235987755982988
//! integration_points = 512
//! samples = 2000
//! total_power = 100.0
//! seed = 1
//! rate_floor_frac = 0.25
//! min_class = 50
//! max_class = 200
//! num_shuffles = 10
//! calibration_draws = 2000
//! ```

use std::fs;
use std::path::Path;

use hrs_core::dataset::ScenarioConfig;

use crate::error::{Result, SimError};

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
    cfg.validate().map_err(|e| SimError::Config(e.to_string()))?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        SimError::Config(msg) => SimError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn to_toml(cfg: &ScenarioConfig) -> String {
    toml::to_string(cfg).expect("scenario config always serializes")
}
