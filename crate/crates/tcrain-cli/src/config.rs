//! Run configuration: the JSON file behind `--config`.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tcrain_core::{GeoBounds, EARTH_RADIUS_KM};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct DayConfig {
    pub day_id: String,
    pub date: NaiveDate,
    pub grid_path: PathBuf,
    /// Per-day mask threshold override, mm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_mm: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
pub struct BoundsConfig {
    pub west: f64,
    pub east: f64,
    pub south: f64,
    pub north: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct RunConfig {
    pub days: Vec<DayConfig>,
    pub track_path: PathBuf,
    pub boundaries_path: PathBuf,
    pub study_bounds: BoundsConfig,
    #[serde(default = "default_trace_mm")]
    pub trace_mm: f64,
    #[serde(default = "default_threshold_mm")]
    pub default_threshold_mm: f64,
    #[serde(default)]
    pub reproject: bool,
    /// Target resolution when reprojecting sinusoidal inputs, degrees.
    #[serde(default = "default_reproject_cellsize")]
    pub reproject_cellsize_deg: f64,
    #[serde(default = "default_sphere_radius_km")]
    pub sphere_radius_km: f64,
}

fn default_trace_mm() -> f64 {
    0.1
}

fn default_threshold_mm() -> f64 {
    0.9
}

fn default_reproject_cellsize() -> f64 {
    0.1
}

fn default_sphere_radius_km() -> f64 {
    EARTH_RADIUS_KM
}

impl RunConfig {
    /// Load and validate a config file. Relative paths inside the file are
    /// resolved against the file's directory. Returns the parsed config and
    /// the raw JSON for echoing into the summary.
    pub fn load(path: &Path) -> CliResult<(RunConfig, Value)> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let raw: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_value(raw.clone())
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;

        let base = path.parent().unwrap_or(Path::new("."));
        config.track_path = resolve(base, &config.track_path);
        config.boundaries_path = resolve(base, &config.boundaries_path);
        for day in &mut config.days {
            day.grid_path = resolve(base, &day.grid_path);
        }
        config.validate()?;
        Ok((config, raw))
    }

    pub fn validate(&self) -> CliResult<()> {
        let mut ids = HashSet::new();
        for (i, day) in self.days.iter().enumerate() {
            if !ids.insert(day.day_id.as_str()) {
                return Err(CliError::Config(format!(
                    "duplicate day_id '{}'",
                    day.day_id
                )));
            }
            if i > 0 && day.date <= self.days[i - 1].date {
                return Err(CliError::Config(format!(
                    "day dates must be strictly increasing at '{}'",
                    day.day_id
                )));
            }
            if let Some(t) = day.threshold_mm {
                if !(t > 0.0) {
                    return Err(CliError::Config(format!(
                        "day '{}': threshold_mm must be positive",
                        day.day_id
                    )));
                }
            }
        }
        if !(self.default_threshold_mm > 0.0) {
            return Err(CliError::Config(
                "default_threshold_mm must be positive".into(),
            ));
        }
        if self.trace_mm < 0.0 {
            return Err(CliError::Config("trace_mm must be non-negative".into()));
        }
        if !(self.sphere_radius_km > 0.0) {
            return Err(CliError::Config("sphere_radius_km must be positive".into()));
        }
        if !(self.reproject_cellsize_deg > 0.0) {
            return Err(CliError::Config(
                "reproject_cellsize_deg must be positive".into(),
            ));
        }
        self.geo_bounds()?;
        Ok(())
    }

    pub fn geo_bounds(&self) -> CliResult<GeoBounds> {
        let b = self.study_bounds;
        GeoBounds::new(b.west, b.east, b.south, b.north)
            .map_err(|e| CliError::Config(format!("study_bounds: {e}")))
    }

    pub fn threshold_for(&self, day: &DayConfig) -> f64 {
        day.threshold_mm.unwrap_or(self.default_threshold_mm)
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
