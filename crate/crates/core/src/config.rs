//! Run configuration shared by the CLI, presets and tests.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cosfire::{configure_with, radii_up_to, render_bar_prototype, ConfigureOptions, CosfireFilter, FilterError};
use crate::datasets::{Layout, LoadOptions};
use crate::dog::{DogSpec, Polarity};
use crate::eval::{CalParams, DistanceMetric, MetricSet, ThresholdGrid, Tolerance};
use crate::raster::{gaussian_radius, Channel, GrayImage};
use crate::rustico::RusticoOperator;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("malformed configuration: {0}")]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    Filter(#[from] FilterError),
}

fn default_rho_step() -> f64 {
    2.0
}
fn default_orientations() -> usize {
    RusticoOperator::DEFAULT_ORIENTATIONS
}
fn default_polarity() -> Polarity {
    Polarity::CenterOn
}
fn default_fraction() -> f64 {
    ConfigureOptions::DEFAULT_FRACTION
}
fn default_prototype_width() -> usize {
    1
}
fn default_cal_radius() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorParams {
    /// DoG standard deviation of every tuple.
    pub sigma: f64,
    /// Largest circle radius.
    pub rho_max: f64,
    #[serde(default = "default_rho_step")]
    pub rho_step: f64,
    pub sigma0: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub xi: f64,
    #[serde(default = "default_orientations")]
    pub orientations: usize,
    #[serde(default = "default_polarity")]
    pub polarity: Polarity,
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    /// Width in pixels of the bar prototype (odd).
    #[serde(default = "default_prototype_width")]
    pub prototype_width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub layout: Layout,
    pub root: PathBuf,
    #[serde(default)]
    pub channel: Channel,
    #[serde(default)]
    pub invert: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    pub metric_set: MetricSet,
    /// Centerline matching tolerance `d*` in pixels (P/R/F only).
    #[serde(default)]
    pub d_star: f64,
    #[serde(default)]
    pub distance_metric: DistanceMetric,
    #[serde(default)]
    pub threshold_grid: ThresholdGrid,
    #[serde(default = "default_cal_radius")]
    pub cal_alpha: usize,
    #[serde(default = "default_cal_radius")]
    pub cal_beta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub operator: OperatorParams,
    pub dataset: DatasetConfig,
    pub evaluation: EvaluationConfig,
    pub output: PathBuf,
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} must be >= 0, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let op = &self.operator;
        positive("sigma", op.sigma)?;
        non_negative("rho_max", op.rho_max)?;
        positive("rho_step", op.rho_step)?;
        positive("sigma0", op.sigma0)?;
        non_negative("alpha", op.alpha)?;
        positive("lambda", op.lambda)?;
        non_negative("xi", op.xi)?;
        if op.orientations == 0 {
            return Err(ConfigError::Invalid("orientations must be >= 1".into()));
        }
        if !(op.fraction > 0.0 && op.fraction <= 1.0) {
            return Err(ConfigError::Invalid(format!("fraction must lie in (0, 1], got {}", op.fraction)));
        }
        if op.prototype_width == 0 || op.prototype_width.is_multiple_of(2) {
            return Err(ConfigError::Invalid("prototype_width must be odd".into()));
        }
        let ev = &self.evaluation;
        non_negative("d_star", ev.d_star)?;
        if ev.threshold_grid.steps == 0 {
            return Err(ConfigError::Invalid("threshold_grid.steps must be >= 1".into()));
        }
        Ok(())
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions { channel: self.dataset.channel, invert: self.dataset.invert }
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance { distance: self.evaluation.d_star, metric: self.evaluation.distance_metric }
    }

    pub fn cal_params(&self) -> CalParams {
        CalParams { alpha: self.evaluation.cal_alpha, beta: self.evaluation.cal_beta }
    }

    pub fn radii(&self) -> Vec<f64> {
        radii_up_to(self.operator.rho_max, self.operator.rho_step)
    }

    /// Bar prototype whose ends sit on the outermost circle (half-length
    /// `ceil(rho_max)`), on a canvas with a `3σ + 1` dark margin.
    pub fn prototype(&self) -> Result<GrayImage, ConfigError> {
        let reach = gaussian_radius(self.operator.sigma);
        let half = (self.operator.rho_max.ceil() as usize).max(1);
        let length = 2 * half + 1;
        let canvas = length + 2 * (reach + 1);
        Ok(render_bar_prototype(length, self.operator.prototype_width, canvas)?)
    }

    /// Configure the excitatory filter on the bar prototype.
    pub fn build_filter(&self) -> Result<CosfireFilter, ConfigError> {
        self.validate()?;
        let op = &self.operator;
        let spec = DogSpec::new(op.polarity, op.sigma).map_err(FilterError::from)?;
        let opts =
            ConfigureOptions { fraction: op.fraction, ..ConfigureOptions::new(self.radii(), op.sigma0, op.alpha) };
        Ok(configure_with(&self.prototype()?, spec, &opts)?)
    }

    pub fn build_operator(&self) -> Result<RusticoOperator, ConfigError> {
        let op = &self.operator;
        Ok(RusticoOperator::with_orientation_count(self.build_filter()?, op.lambda, op.xi, op.orientations)?)
    }
}

/// Operator parameters from the published per-dataset table. Paths are
/// relative to the `presets/` directory the shipped files live in.
pub mod presets {
    use super::*;

    fn config(
        op: (f64, f64, f64, f64, f64, f64),
        layout: Layout,
        channel: Channel,
        invert: bool,
        metric_set: MetricSet,
        d_star: f64,
    ) -> RunConfig {
        let (sigma, rho_max, sigma0, alpha, lambda, xi) = op;
        RunConfig {
            operator: OperatorParams {
                sigma,
                rho_max,
                rho_step: default_rho_step(),
                sigma0,
                alpha,
                lambda,
                xi,
                orientations: default_orientations(),
                polarity: Polarity::CenterOn,
                fraction: default_fraction(),
                prototype_width: default_prototype_width(),
            },
            dataset: DatasetConfig {
                layout,
                root: PathBuf::from(format!("../data/{}", layout.name())),
                channel,
                invert,
            },
            evaluation: EvaluationConfig {
                metric_set,
                d_star,
                distance_metric: DistanceMetric::Euclidean,
                threshold_grid: ThresholdGrid::default(),
                cal_alpha: 2,
                cal_beta: 2,
            },
            output: PathBuf::from(format!("../runs/{}", layout.name())),
        }
    }

    /// σ=2.5, ρ=16, σ₀=3, α=0.1, λ=0.5, ξ=1.5; d*=3.
    pub fn tb_roses_1() -> RunConfig {
        config((2.5, 16.0, 3.0, 0.1, 0.5, 1.5), Layout::TbRoses1, Channel::Luminance, true, MetricSet::Prf, 3.0)
    }

    /// σ=5.7, ρ=12, σ₀=5, α=0.1, λ=3, ξ=2; d*=2.
    pub fn cracktree206() -> RunConfig {
        config((5.7, 12.0, 5.0, 0.1, 3.0, 2.0), Layout::Cracktree206, Channel::Luminance, true, MetricSet::Prf, 2.0)
    }

    /// σ=2.1, ρ=10, σ₀=3, α=0.2, λ=3, ξ=1; MCC and CAL in the FOV.
    pub fn drive() -> RunConfig {
        config((2.1, 10.0, 3.0, 0.2, 3.0, 1.0), Layout::Drive, Channel::Green, true, MetricSet::MccCal, 0.0)
    }
}
