//! Synthetic precipitation fields built from Gaussian blobs, with per-pixel
//! ownership ground truth. These are the oracles for extraction and
//! statistics tests and back the `synth` CLI subcommand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GeoRef, Grid};
use crate::scalar::Scalar;

/// One Gaussian rain blob.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub id: String,
    pub center_lat: f64,
    pub center_lon: f64,
    pub amplitude_mm: f64,
    pub sigma_deg: f64,
}

impl BlobSpec {
    fn validate(&self) -> Result<()> {
        if !(self.amplitude_mm > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "blob '{}': amplitude must be positive",
                self.id
            )));
        }
        if !(self.sigma_deg > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "blob '{}': sigma must be positive",
                self.id
            )));
        }
        Ok(())
    }

    /// Contribution at planar degree distance `d` from the center.
    pub fn contribution(&self, lat: f64, lon: f64) -> f64 {
        let d2 = (lat - self.center_lat).powi(2) + (lon - self.center_lon).powi(2);
        self.amplitude_mm * (-d2 / (2.0 * self.sigma_deg * self.sigma_deg)).exp()
    }

    /// Radius of the disk where this blob alone exceeds `threshold`, degrees.
    pub fn superthreshold_radius_deg(&self, threshold: f64) -> Option<f64> {
        (threshold > 0.0 && self.amplitude_mm > threshold)
            .then(|| self.sigma_deg * (2.0 * (self.amplitude_mm / threshold).ln()).sqrt())
    }
}

/// Analytic area of the single-blob super-threshold disk, degree².
pub fn analytic_disk_area_deg2(amplitude: f64, threshold: f64, sigma: f64) -> f64 {
    std::f64::consts::PI * 2.0 * sigma * sigma * (amplitude / threshold).ln()
}

/// Render the blob sum on a grid. Returns the field and the per-pixel owner
/// map (index into `blobs` of the largest contribution; ties take the first).
///
/// Distances are planar in degrees, so fields are only meaningful on grids
/// within roughly ±20° of the equator.
pub fn render_field<T: Scalar>(
    blobs: &[BlobSpec],
    georef: GeoRef,
    nodata: T,
) -> Result<(Grid<T>, Vec<u32>)> {
    if blobs.is_empty() {
        return Err(Error::EmptyInput);
    }
    for blob in blobs {
        blob.validate()?;
    }
    georef.validate()?;
    georef.require_geographic()?;

    let mut values = Vec::with_capacity(georef.len());
    let mut owners = Vec::with_capacity(georef.len());
    for row in 0..georef.nrows {
        for col in 0..georef.ncols {
            let (lat, lon) = georef.cell_center_unchecked(row, col);
            let mut total = 0.0;
            let mut best = 0u32;
            let mut best_contribution = f64::NEG_INFINITY;
            for (bi, blob) in blobs.iter().enumerate() {
                let c = blob.contribution(lat, lon);
                total += c;
                if c > best_contribution {
                    best_contribution = c;
                    best = bi as u32;
                }
            }
            values.push(T::from_f64_lossy(total));
            owners.push(best);
        }
    }
    Ok((Grid::new(georef, nodata, values)?, owners))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::make_mask;
    use crate::label::{label_components, Connectivity};

    fn blob(id: &str, lat: f64, lon: f64, amp: f64, sigma: f64) -> BlobSpec {
        BlobSpec {
            id: id.into(),
            center_lat: lat,
            center_lon: lon,
            amplitude_mm: amp,
            sigma_deg: sigma,
        }
    }

    #[test]
    fn value_at_the_center_equals_the_amplitude() {
        // grid chosen so a cell center lands exactly on the blob center
        let georef = GeoRef::geographic(10, 10, 0.0, 0.0, 1.0);
        let b = blob("a", 4.5, 4.5, 12.0, 1.0);
        let (grid, owners) = render_field::<f64>(&[b], georef, -9999.0).unwrap();
        let (row, col) = georef.cell_containing(4.5001, 4.5001).unwrap();
        assert!((grid.value(row, col) - 12.0).abs() < 1e-12);
        assert!(owners.iter().all(|&o| o == 0));
    }

    #[test]
    fn value_decays_monotonically_with_distance() {
        let georef = GeoRef::geographic(20, 1, 0.0, 0.0, 0.5);
        let b = blob("a", 0.25, 0.25, 10.0, 2.0);
        let (grid, _) = render_field::<f64>(&[b], georef, -9999.0).unwrap();
        for col in 1..20 {
            assert!(grid.value(0, col) < grid.value(0, col - 1), "col {col}");
        }
    }

    #[test]
    fn two_separated_blobs_make_exactly_two_components() {
        let georef = GeoRef::geographic(200, 120, 60.0, 0.0, 0.1);
        let a = blob("cyclone", 7.0, 66.0, 24.0, 0.5);
        let b = blob("monsoon", 5.0, 76.0, 24.0, 0.5); // >8 sigma apart
        let (grid, owners) = render_field::<f64>(&[a, b], georef, -9999.0).unwrap();
        let mask = make_mask(&grid, 12.0);
        let labeled = label_components(&mask, Connectivity::Four);
        assert_eq!(labeled.component_count(), 2);

        // every super-threshold pixel's component agrees with its owner
        for (row, col) in mask.iter_true() {
            let label = labeled.label(row, col);
            let owner = owners[georef.index(row, col)];
            assert_eq!(label, owner + 1, "pixel ({row},{col})");
        }
    }

    #[test]
    fn single_blob_cluster_centroid_lands_within_one_cell_of_the_center() {
        use crate::track::TrackPoint;
        use crate::zonal::cluster_centroid;
        use chrono::TimeZone;

        let georef = GeoRef::geographic(100, 100, 0.0, 0.0, 0.1);
        let b = blob("a", 5.03, 4.97, 15.0, 0.7);
        let (grid, _) = render_field::<f64>(std::slice::from_ref(&b), georef, -9999.0).unwrap();
        let mask = make_mask(&grid, 3.0);
        let labeled = label_components(&mask, Connectivity::Four);
        let fix = TrackPoint {
            timestamp: chrono::Utc.with_ymd_and_hms(2023, 6, 10, 3, 0, 0).unwrap(),
            lat: b.center_lat,
            lon: b.center_lon,
            label: String::new(),
        };
        let cluster = crate::cluster::select_cyclone_cluster(&labeled, &fix, &grid).unwrap();
        let (lat, lon) = cluster_centroid(&cluster, &grid).unwrap();
        assert!((lat - b.center_lat).abs() < 0.1, "{lat}");
        assert!((lon - b.center_lon).abs() < 0.1, "{lon}");
    }

    #[test]
    fn empty_blob_list_is_rejected() {
        let georef = GeoRef::geographic(4, 4, 0.0, 0.0, 1.0);
        assert!(matches!(
            render_field::<f64>(&[], georef, -9999.0).unwrap_err(),
            Error::EmptyInput
        ));
    }

    #[test]
    fn superthreshold_radius_matches_the_analytic_disk() {
        let b = blob("a", 0.0, 0.0, 12.0, 0.5);
        let r = b.superthreshold_radius_deg(1.2).unwrap();
        let disk = analytic_disk_area_deg2(12.0, 1.2, 0.5);
        assert!((std::f64::consts::PI * r * r - disk).abs() < 1e-12);
        assert_eq!(b.superthreshold_radius_deg(15.0), None);
    }
}
