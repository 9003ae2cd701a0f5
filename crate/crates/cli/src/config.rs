//! Run configuration: JSON schema, defaults and validation.
//!
//! A config file describes one run: the image (file or synthetic), the
//! force range, contour resolution and redistribution parameters, the
//! stopping rule and which outputs to write. Unknown keys are rejected so
//! typos fail loudly instead of silently using a default.

use std::path::PathBuf;

use serde::Deserialize;
use thiserror::Error;

use segment_core::evolution::StoppingCriterion;
use segment_core::force::synth::{NoiseSpec, Shape};
use segment_core::geometry::Vec2;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config does not match the expected schema: {0}")]
    Schema(String),
    #[error("{field}: {message}")]
    Range { field: String, message: String },
}

fn range_error(field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Range {
        field: field.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub image: ImageSource,
    #[serde(default = "default_f_min")]
    pub f_min: f64,
    #[serde(default = "default_f_max")]
    pub f_max: f64,
    #[serde(default = "default_n_vertices")]
    pub n_vertices: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub initial: InitialCurve,
    #[serde(default)]
    pub stop: StopConfig,
    #[serde(default)]
    pub outputs: OutputPaths,
    /// Times at which intermediate contours are exported, in addition to
    /// the final one.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

fn default_f_min() -> f64 {
    -100.0
}

fn default_f_max() -> f64 {
    100.0
}

fn default_n_vertices() -> usize {
    250
}

fn default_epsilon() -> f64 {
    0.2
}

fn default_omega() -> f64 {
    50_000.0
}

fn default_lambda() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ImageSource {
    /// Path to a PGM file (P2 or P5).
    Pgm(PathBuf),
    Synthetic(SyntheticImage),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticImage {
    #[serde(default = "default_bitmap_side")]
    pub width: usize,
    #[serde(default = "default_bitmap_side")]
    pub height: usize,
    pub shape: ShapeConfig,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
}

fn default_bitmap_side() -> usize {
    600
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    Disk {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Rectangle {
        #[serde(default)]
        center: [f64; 2],
        half_width: f64,
        half_height: f64,
        #[serde(default)]
        corner_radius: f64,
    },
    CShape {
        #[serde(default)]
        center: [f64; 2],
        outer_radius: f64,
        inner_radius: f64,
        gap_width: f64,
    },
}

impl ShapeConfig {
    pub fn to_shape(&self) -> Shape {
        match *self {
            ShapeConfig::Disk { center, radius } => Shape::Disk {
                center: Vec2::new(center[0], center[1]),
                radius,
            },
            ShapeConfig::Rectangle {
                center,
                half_width,
                half_height,
                corner_radius,
            } => Shape::Rectangle {
                center: Vec2::new(center[0], center[1]),
                half_width,
                half_height,
                corner_radius,
            },
            ShapeConfig::CShape {
                center,
                outer_radius,
                inner_radius,
                gap_width,
            } => Shape::CShape {
                center: Vec2::new(center[0], center[1]),
                outer_radius,
                inner_radius,
                gap_width,
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub density: f64,
    pub amplitude: u8,
    #[serde(default = "default_blob_radius")]
    pub blob_radius_px: u32,
}

fn default_blob_radius() -> u32 {
    3
}

impl NoiseConfig {
    pub fn to_noise(&self) -> NoiseSpec {
        NoiseSpec {
            density: self.density,
            amplitude: self.amplitude,
            blob_radius_px: self.blob_radius_px,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCurve {
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "default_initial_radius")]
    pub radius: f64,
}

fn default_initial_radius() -> f64 {
    1.5
}

impl Default for InitialCurve {
    fn default() -> Self {
        InitialCurve {
            center: [0.0, 0.0],
            radius: default_initial_radius(),
        }
    }
}

/// Stopping rule. Omitting the whole object (or all fields) uses the
/// default: stationarity at speed 0.5 over a 10-step window, with a
/// 200000-step safety budget.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopConfig {
    #[serde(default)]
    pub fixed_time: Option<f64>,
    #[serde(default)]
    pub speed_tol: Option<f64>,
    #[serde(default)]
    pub window: Option<u32>,
    #[serde(default)]
    pub max_steps: Option<u64>,
}

pub const DEFAULT_SPEED_TOL: f64 = 0.5;
pub const DEFAULT_WINDOW: u32 = 10;
pub const DEFAULT_MAX_STEPS: u64 = 200_000;

impl StopConfig {
    pub fn to_criterion(&self) -> StoppingCriterion {
        let empty = self.fixed_time.is_none()
            && self.speed_tol.is_none()
            && self.window.is_none()
            && self.max_steps.is_none();
        if empty {
            return StoppingCriterion::stationary(DEFAULT_SPEED_TOL, DEFAULT_WINDOW)
                .or_max_steps(DEFAULT_MAX_STEPS);
        }
        let mut criterion = StoppingCriterion::default();
        if let Some(t_end) = self.fixed_time {
            criterion = criterion.or_fixed_time(t_end);
        }
        if self.speed_tol.is_some() || self.window.is_some() {
            criterion = criterion.or_stationary(
                self.speed_tol.unwrap_or(DEFAULT_SPEED_TOL),
                self.window.unwrap_or(DEFAULT_WINDOW),
            );
        }
        if let Some(steps) = self.max_steps {
            criterion = criterion.or_max_steps(steps);
        }
        criterion
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub overlay_pgm: Option<PathBuf>,
    pub log: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Schema(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.f_min < 0.0 && 0.0 < self.f_max)
            || !self.f_min.is_finite()
            || !self.f_max.is_finite()
        {
            return Err(range_error(
                "f_min/f_max",
                format!(
                    "force range [{}, {}] must satisfy f_min < 0 < f_max",
                    self.f_min, self.f_max
                ),
            ));
        }
        if self.n_vertices < 4 {
            return Err(range_error(
                "n_vertices",
                format!("{} is too few, need at least 4", self.n_vertices),
            ));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(range_error(
                "epsilon",
                format!("{} must lie in [0, 1)", self.epsilon),
            ));
        }
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return Err(range_error(
                "omega",
                format!("{} must be nonnegative", self.omega),
            ));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(range_error(
                "lambda",
                format!("{} must be positive", self.lambda),
            ));
        }
        if !(self.initial.radius > 0.0) || !self.initial.radius.is_finite() {
            return Err(range_error(
                "initial.radius",
                format!("{} must be positive", self.initial.radius),
            ));
        }
        if !self.initial.center.iter().all(|c| c.is_finite()) {
            return Err(range_error("initial.center", "must be finite"));
        }
        if let Some(t_end) = self.stop.fixed_time {
            if !(t_end > 0.0) || !t_end.is_finite() {
                return Err(range_error(
                    "stop.fixed_time",
                    format!("{t_end} must be positive"),
                ));
            }
        }
        if let Some(speed_tol) = self.stop.speed_tol {
            if !(speed_tol > 0.0) || !speed_tol.is_finite() {
                return Err(range_error(
                    "stop.speed_tol",
                    format!("{speed_tol} must be positive"),
                ));
            }
        }
        if self.stop.window == Some(0) {
            return Err(range_error("stop.window", "must be at least 1"));
        }
        for &t in &self.snapshot_times {
            if !(t > 0.0) || !t.is_finite() {
                return Err(range_error(
                    "snapshot_times",
                    format!("{t} must be positive"),
                ));
            }
        }
        if let ImageSource::Synthetic(synthetic) = &self.image {
            if synthetic.width == 0 || synthetic.height == 0 {
                return Err(range_error(
                    "image.synthetic",
                    format!(
                        "dimensions {}x{} must both be at least 1",
                        synthetic.width, synthetic.height
                    ),
                ));
            }
            synthetic
                .shape
                .to_shape()
                .validate()
                .map_err(|e| range_error("image.synthetic.shape", e))?;
            if let Some(noise) = &synthetic.noise {
                if !(0.0..=1.0).contains(&noise.density) {
                    return Err(range_error(
                        "image.synthetic.noise.density",
                        format!("{} must lie in [0, 1]", noise.density),
                    ));
                }
                if noise.blob_radius_px == 0 {
                    return Err(range_error(
                        "image.synthetic.noise.blob_radius_px",
                        "must be at least 1",
                    ));
                }
            }
        }
        Ok(())
    }
}
