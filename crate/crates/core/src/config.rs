//! JSON run configuration.
//!
//! Every section and key is optional; missing keys take their defaults and
//! unknown keys are rejected. Example:
//!
//! ```json
//! {
//!   "scenario": { "kind": "corridor", "target_density": 1.0 },
//!   "model": { "phi_tau": 1.309, "w_alpha": 0.5, "w_phi": 0.5 },
//!   "gait": { "mu_step": 0.67, "body_diameter": 0.4 },
//!   "seed": 42
//! }
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::metrics::Roi;
use crate::model::{GaitParams, ModelParams};
use crate::scenarios::ScenarioSpec;

/// Measurement protocol for the corridor and bottleneck experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementParams {
    /// Ticks discarded before ROI sampling starts.
    pub warmup_ticks: u64,
    /// Ticks sampled after the warm-up.
    pub measure_ticks: u64,
    pub roi_center: [f64; 2],
    pub roi_side: f64,
    /// Sliding window for door flow (s); a multiple of `dt`.
    pub flow_window: f64,
    /// Tick cap for a room evacuation.
    pub max_ticks: u64,
}

impl Default for MeasurementParams {
    fn default() -> Self {
        MeasurementParams {
            warmup_ticks: 200,
            measure_ticks: 400,
            roi_center: [10.0, 2.5],
            roi_side: 2.0,
            flow_window: 10.0,
            max_ticks: 1200,
        }
    }
}

impl MeasurementParams {
    pub fn roi(&self) -> Roi {
        Roi {
            center: Vec2::new(self.roi_center[0], self.roi_center[1]),
            half_side: self.roi_side / 2.0,
        }
    }
}

fn default_seed() -> u64 {
    42
}

fn default_ticks() -> u64 {
    600
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default)]
    pub gait: GaitParams,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_ticks")]
    pub ticks: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub measurement: MeasurementParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            scenario: ScenarioSpec::default(),
            model: ModelParams::default(),
            gait: GaitParams::default(),
            seed: default_seed(),
            ticks: default_ticks(),
            output_dir: default_output_dir(),
            measurement: MeasurementParams::default(),
        }
    }
}

fn invalid(path: &str, e: Error) -> Error {
    let message = match e {
        Error::InvalidParameter(m) => m,
        other => other.to_string(),
    };
    Error::Config {
        path: path.into(),
        message,
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate().map_err(|e| invalid("model", e))?;
        self.gait.validate().map_err(|e| invalid("gait", e))?;
        self.scenario.validate().map_err(|e| invalid("scenario", e))?;
        let m = &self.measurement;
        if m.roi_side.is_nan() || m.roi_side <= 0.0 {
            return Err(invalid(
                "measurement.roi_side",
                Error::InvalidParameter("must be > 0".into()),
            ));
        }
        let w = m.flow_window / self.model.dt;
        if m.flow_window.is_nan() || m.flow_window <= 0.0 || (w - w.round()).abs() > 1e-9 {
            return Err(invalid(
                "measurement.flow_window",
                Error::InvalidParameter("must be a positive multiple of model.dt".into()),
            ));
        }
        if m.measure_ticks == 0 {
            return Err(invalid(
                "measurement.measure_ticks",
                Error::InvalidParameter("must be > 0".into()),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: SimConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &std::path::Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
