//! Run configuration for threshold searches and parameter sweeps.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fbqc::{EncodingMode, FusionNetwork};
use crate::loss::DEFAULT_LAYER_LENGTH_UM;
use crate::sweep::Axis;

pub const DEFAULT_GRID_POINTS: usize = 41;
pub const DEFAULT_BISECTION_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("axis {axis}: {reason}")]
    BadAxis { axis: &'static str, reason: String },
    #[error("{0}")]
    Invalid(String),
}

/// Inclusive sampling range for one loss axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisRange {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn validate(&self, axis: &'static str, lo: f64, hi: f64) -> Result<(), ConfigError> {
        if self.points < 2 {
            return Err(ConfigError::BadAxis {
                axis,
                reason: format!("needs at least 2 points, got {}", self.points),
            });
        }
        if !(self.min < self.max) || self.min < lo || self.max > hi {
            return Err(ConfigError::BadAxis {
                axis,
                reason: format!(
                    "range [{}, {}] must be increasing and within [{lo}, {hi}]",
                    self.min, self.max
                ),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AxisRanges {
    pub p_eff: AxisRange,
    pub bs_loss_db: AxisRange,
    pub prop_loss_db_per_cm: AxisRange,
}

impl Default for AxisRanges {
    fn default() -> Self {
        AxisRanges {
            p_eff: AxisRange {
                min: 0.9,
                max: 1.0,
                points: DEFAULT_GRID_POINTS,
            },
            bs_loss_db: AxisRange {
                min: 0.0,
                max: 0.2,
                points: DEFAULT_GRID_POINTS,
            },
            prop_loss_db_per_cm: AxisRange {
                min: 0.0,
                max: 2.0,
                points: DEFAULT_GRID_POINTS,
            },
        }
    }
}

impl AxisRanges {
    pub fn for_axis(&self, axis: Axis) -> AxisRange {
        match axis {
            Axis::PEff => self.p_eff,
            Axis::BsLossDb => self.bs_loss_db,
            Axis::PropLossDbPerCm => self.prop_loss_db_per_cm,
        }
    }
}

fn default_schemes() -> Vec<String> {
    vec![
        "regular".to_string(),
        "boosted-11".to_string(),
        "boosted-2x11".to_string(),
        "boosted-phi+".to_string(),
        "boosted-a2".to_string(),
        "boosted-phi+b2".to_string(),
    ]
}

fn default_networks() -> Vec<FusionNetwork> {
    FusionNetwork::ALL.to_vec()
}

fn default_encodings() -> Vec<EncodingMode> {
    EncodingMode::ALL.to_vec()
}

fn default_layer_length() -> f64 {
    DEFAULT_LAYER_LENGTH_UM
}

fn default_bisection_tol() -> f64 {
    DEFAULT_BISECTION_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub schemes: Vec<String>,
    pub networks: Vec<FusionNetwork>,
    pub encodings: Vec<EncodingMode>,
    pub axes: AxisRanges,
    pub layer_length_um: f64,
    pub bisection_tolerance: f64,
    /// 0 means use all available workers.
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            schemes: default_schemes(),
            networks: default_networks(),
            encodings: default_encodings(),
            axes: AxisRanges::default(),
            layer_length_um: default_layer_length(),
            bisection_tolerance: default_bisection_tol(),
            workers: 0,
        }
    }
}

impl SweepConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: SweepConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.axes.p_eff.validate("p_eff", 0.0, 1.0)?;
        self.axes
            .bs_loss_db
            .validate("bs_loss_db", 0.0, f64::INFINITY)?;
        self.axes
            .prop_loss_db_per_cm
            .validate("prop_loss_db_per_cm", 0.0, f64::INFINITY)?;
        if !(self.layer_length_um > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "layer_length_um must be positive, got {}",
                self.layer_length_um
            )));
        }
        if !(self.bisection_tolerance > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "bisection_tolerance must be positive, got {}",
                self.bisection_tolerance
            )));
        }
        if self.schemes.is_empty() || self.networks.is_empty() || self.encodings.is_empty() {
            return Err(ConfigError::Invalid(
                "schemes, networks and encodings must be non-empty".to_string(),
            ));
        }
        Ok(())
    }
}
