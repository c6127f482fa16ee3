//! Sinusoidal <-> geographic transforms, nearest-neighbor reprojection,
//! bounding-box subsetting and great-circle distance.

use crate::error::{Error, Result};
use crate::grid::{Crs, GeoRef, Grid};
use crate::scalar::Scalar;

/// Mean Earth radius used throughout, km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Spherical sinusoidal projection parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidalParams {
    pub sphere_radius_km: f64,
}

impl Default for SinusoidalParams {
    fn default() -> Self {
        Self {
            sphere_radius_km: EARTH_RADIUS_KM,
        }
    }
}

/// Geographic bounding box in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoBounds {
    pub west: f64,
    pub east: f64,
    pub south: f64,
    pub north: f64,
}

impl GeoBounds {
    pub fn new(west: f64, east: f64, south: f64, north: f64) -> Result<Self> {
        if !(west < east) || !(south < north) {
            return Err(Error::InvalidArgument(format!(
                "degenerate bounds: west {west}, east {east}, south {south}, north {north}"
            )));
        }
        if west < -180.0 || east > 180.0 || south < -90.0 || north > 90.0 {
            return Err(Error::InvalidArgument(
                "bounds outside [-180, 180] x [-90, 90]".into(),
            ));
        }
        Ok(Self {
            west,
            east,
            south,
            north,
        })
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        lon >= self.west && lon <= self.east && lat >= self.south && lat <= self.north
    }
}

/// Forward sinusoidal: `x = R * lon_rad * cos(lat_rad)`, `y = R * lat_rad`, in km.
pub fn sinu_forward(lat_deg: f64, lon_deg: f64, params: &SinusoidalParams) -> (f64, f64) {
    let r = params.sphere_radius_km;
    let phi = lat_deg.to_radians();
    let lambda = lon_deg.to_radians();
    (r * lambda * phi.cos(), r * phi)
}

/// Inverse sinusoidal. At the poles longitude is reported as 0.
pub fn sinu_inverse(x_km: f64, y_km: f64, params: &SinusoidalParams) -> Result<(f64, f64)> {
    let r = params.sphere_radius_km;
    let y_max = r * std::f64::consts::FRAC_PI_2;
    if y_km.abs() > y_max * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "y {y_km} km lies beyond the pole (|y| <= {y_max:.3})"
        )));
    }
    let phi = (y_km / r).clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
    let cos_phi = phi.cos();
    if cos_phi.abs() < 1e-12 {
        return Ok((phi.to_degrees(), 0.0));
    }
    let lambda = x_km / (r * cos_phi);
    Ok((phi.to_degrees(), lambda.to_degrees()))
}

/// Great-circle distance between two points, km, by the haversine formula.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64, radius_km: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = (lat2 - lat1).to_radians();
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * radius_km * a.sqrt().min(1.0).asin()
}

/// Resample a sinusoidal-km grid onto a geographic grid over `target` with
/// square `cellsize_deg` cells, nearest-neighbor (the value of the source
/// cell containing each target cell center). Target cells that map outside
/// the source extent become nodata.
pub fn reproject_to_geographic<T: Scalar>(
    src: &Grid<T>,
    target: GeoBounds,
    cellsize_deg: f64,
    params: &SinusoidalParams,
) -> Result<Grid<T>> {
    if src.georef().crs != Crs::SinusoidalKm {
        return Err(Error::InvalidArgument(
            "reprojection source must declare sinusoidal_km georeferencing".into(),
        ));
    }
    if !(cellsize_deg > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cellsize must be positive, got {cellsize_deg}"
        )));
    }
    let src_ref = src.georef();
    let ncols = (((target.east - target.west) / cellsize_deg).round() as usize).max(1);
    let nrows = (((target.north - target.south) / cellsize_deg).round() as usize).max(1);
    let out_ref = GeoRef::geographic(ncols, nrows, target.west, target.south, cellsize_deg);
    out_ref.validate()?;

    let nodata = src.nodata();
    let mut values = Vec::with_capacity(out_ref.len());
    for row in 0..nrows {
        for col in 0..ncols {
            let (lat, lon) = out_ref.cell_center_unchecked(row, col);
            let (x, y) = sinu_forward(lat, lon, params);
            let v = match src_ref.cell_containing(y, x) {
                Some((r, c)) => src.value(r, c),
                None => nodata,
            };
            values.push(v);
        }
    }
    Ok(Grid::new(out_ref, nodata, values)?.with_precision(src.precision()))
}

/// Crop a geographic grid to the rows and columns whose cell centers fall
/// inside `bounds` (closed intervals).
pub fn subset<T: Scalar>(grid: &Grid<T>, bounds: GeoBounds) -> Result<Grid<T>> {
    grid.georef().require_geographic()?;
    let g = grid.georef();

    let col_range = {
        let centers = (0..g.ncols).map(|c| g.xll + (c as f64 + 0.5) * g.cellsize);
        first_last(centers, |lon| lon >= bounds.west && lon <= bounds.east)
    };
    let row_range = {
        // north-up rows: row 0 has the largest latitude
        let centers = (0..g.nrows).map(|r| g.yll + (g.nrows as f64 - r as f64 - 0.5) * g.cellsize);
        first_last(centers, |lat| lat >= bounds.south && lat <= bounds.north)
    };
    let (Some((col_lo, col_hi)), Some((row_lo, row_hi))) = (col_range, row_range) else {
        return Err(Error::EmptyIntersection);
    };

    let ncols = col_hi - col_lo + 1;
    let nrows = row_hi - row_lo + 1;
    let out_ref = GeoRef::geographic(
        ncols,
        nrows,
        g.xll + col_lo as f64 * g.cellsize,
        g.yll + (g.nrows - 1 - row_hi) as f64 * g.cellsize,
        g.cellsize,
    );
    let mut values = Vec::with_capacity(out_ref.len());
    for row in row_lo..=row_hi {
        for col in col_lo..=col_hi {
            values.push(grid.value(row, col));
        }
    }
    Ok(Grid::new(out_ref, grid.nodata(), values)?.with_precision(grid.precision()))
}

/// First and last index satisfying `keep` (the kept set is contiguous for
/// interval predicates).
fn first_last<I: Iterator<Item = f64>>(
    centers: I,
    keep: impl Fn(f64) -> bool,
) -> Option<(usize, usize)> {
    let mut range = None;
    for (i, c) in centers.enumerate() {
        if keep(c) {
            range = match range {
                None => Some((i, i)),
                Some((lo, _)) => Some((lo, i)),
            };
        }
    }
    range
}
