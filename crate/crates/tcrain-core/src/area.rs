//! Per-cell surface area on the sphere.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::project::EARTH_RADIUS_KM;

/// How cell areas are computed.
///
/// `Spherical` is latitude-aware; `Flat` treats every cell as the
/// equatorial square implied by the grid resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AreaMode {
    #[default]
    Spherical,
    Flat,
}

impl FromStr for AreaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spherical" => Ok(AreaMode::Spherical),
            "flat" => Ok(AreaMode::Flat),
            other => Err(Error::InvalidArgument(format!(
                "area mode must be 'spherical' or 'flat', got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaModel {
    pub sphere_radius_km: f64,
    pub mode: AreaMode,
}

impl Default for AreaModel {
    fn default() -> Self {
        Self {
            sphere_radius_km: EARTH_RADIUS_KM,
            mode: AreaMode::Spherical,
        }
    }
}

impl AreaModel {
    pub fn flat(sphere_radius_km: f64) -> Self {
        Self {
            sphere_radius_km,
            mode: AreaMode::Flat,
        }
    }
}

/// Area in km² of a square grid cell centered at `lat_center_deg` with side
/// `cellsize_deg`.
///
/// Spherical mode: `R² * dlon * (sin(top) - sin(bottom))`. Flat mode:
/// `(R * cellsize_rad)²` at every latitude.
pub fn cell_area(lat_center_deg: f64, cellsize_deg: f64, model: &AreaModel) -> Result<f64> {
    let half = cellsize_deg / 2.0;
    if lat_center_deg.abs() + half > 90.0 + 1e-9 {
        return Err(Error::PoleOverflow);
    }
    let r = model.sphere_radius_km;
    let cell_rad = cellsize_deg.to_radians();
    match model.mode {
        AreaMode::Flat => Ok((r * cell_rad).powi(2)),
        AreaMode::Spherical => {
            let top = (lat_center_deg + half).min(90.0).to_radians();
            let bottom = (lat_center_deg - half).max(-90.0).to_radians();
            Ok(r * r * cell_rad * (top.sin() - bottom.sin()))
        }
    }
}
