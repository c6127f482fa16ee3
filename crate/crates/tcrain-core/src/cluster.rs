//! Thresholding, cyclone-cluster selection via the best-track fix, and
//! extraction of the selected cluster's values.

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, GeoRef, Grid};
use crate::label::{Connectivity, LabeledGrid};
use crate::project::{haversine_km, EARTH_RADIUS_KM};
use crate::scalar::Scalar;
use crate::track::TrackPoint;

/// Masking and selection knobs, with the pipeline defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskConfig {
    /// Retain cells strictly above this accumulation, mm.
    pub threshold_mm: f64,
    /// Cells at or below this are trace rainfall and excluded from means, mm.
    pub trace_mm: f64,
    pub connectivity: Connectivity,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            threshold_mm: 0.9,
            trace_mm: 0.1,
            connectivity: Connectivity::Four,
        }
    }
}

/// One labeled component, its pixels in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub label: u32,
    pub pixels: Vec<(usize, usize)>,
    /// Day the cluster was extracted from; empty until stamped by the caller.
    pub source_day: String,
}

impl Cluster {
    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    /// Mask with exactly this cluster's pixels set.
    pub fn to_mask(&self, georef: GeoRef) -> Result<BinaryMask> {
        let mut mask = BinaryMask::all_false(georef)?;
        for &(row, col) in &self.pixels {
            mask.set_bit(row, col, true);
        }
        Ok(mask)
    }
}

/// Threshold a grid: the bit is set iff the cell is valid and its value
/// strictly exceeds `threshold`.
pub fn make_mask<T: Scalar>(grid: &Grid<T>, threshold: T) -> BinaryMask {
    let bits = grid
        .values()
        .iter()
        .map(|&v| v != grid.nodata() && v > threshold)
        .collect();
    BinaryMask::new(grid.georef(), bits).expect("mask dimensions match the grid")
}

/// Pick the component associated with the cyclone: the one containing the
/// track fix, else the one whose nearest pixel center minimizes great-circle
/// distance to the fix. Distance ties prefer the larger component, then the
/// smaller label.
pub fn select_cyclone_cluster<T: Scalar>(
    labeled: &LabeledGrid,
    fix: &TrackPoint,
    grid: &Grid<T>,
) -> Result<Cluster> {
    labeled
        .georef()
        .require_same(&grid.georef(), "labeling vs grid")?;
    labeled.georef().require_geographic()?;
    if labeled.component_count() == 0 {
        return Err(Error::NoCluster);
    }
    let georef = labeled.georef();
    let Some((fix_row, fix_col)) = georef.cell_containing(fix.lat, fix.lon) else {
        return Err(Error::InvalidArgument(format!(
            "track fix ({}, {}) outside the grid extent",
            fix.lat, fix.lon
        )));
    };

    let direct = labeled.label(fix_row, fix_col);
    if direct != 0 {
        return Ok(Cluster {
            label: direct,
            pixels: labeled.pixels_of(direct),
            source_day: String::new(),
        });
    }

    // fix sits on background: nearest component by pixel-center distance
    let mut nearest: Vec<f64> = vec![f64::INFINITY; labeled.component_count()];
    for row in 0..georef.nrows {
        for col in 0..georef.ncols {
            let label = labeled.label(row, col);
            if label == 0 {
                continue;
            }
            let (lat, lon) = georef.cell_center_unchecked(row, col);
            let d = haversine_km(fix.lat, fix.lon, lat, lon, EARTH_RADIUS_KM);
            let slot = &mut nearest[label as usize - 1];
            if d < *slot {
                *slot = d;
            }
        }
    }
    let best = (1..=labeled.component_count() as u32)
        .min_by(|&a, &b| {
            let (da, db) = (nearest[a as usize - 1], nearest[b as usize - 1]);
            da.total_cmp(&db)
                .then_with(|| labeled.component_size(b).cmp(&labeled.component_size(a)))
                .then(a.cmp(&b))
        })
        .expect("at least one component");
    Ok(Cluster {
        label: best,
        pixels: labeled.pixels_of(best),
        source_day: String::new(),
    })
}

/// Grid equal to `grid` on the cluster's pixels and nodata everywhere else.
pub fn extract_cluster_grid<T: Scalar>(grid: &Grid<T>, cluster: &Cluster) -> Grid<T> {
    let mut out = Grid::filled(grid.georef(), grid.nodata(), grid.nodata())
        .expect("grid georeferencing is already valid")
        .with_precision(grid.precision());
    for &(row, col) in &cluster.pixels {
        out.set_value(row, col, grid.value(row, col));
    }
    out
}

/// Pixel totals of the day: `(mask_count, cluster_count)`.
pub fn pixel_counts(mask: &BinaryMask, cluster: &Cluster) -> (usize, usize) {
    (mask.count_ones(), cluster.pixel_count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::label_components;
    use chrono::{NaiveDate, Utc};

    fn grid_from(rows: &[&[f64]]) -> Grid<f64> {
        let nrows = rows.len();
        let ncols = rows[0].len();
        let georef = GeoRef::geographic(ncols, nrows, 0.0, 0.0, 1.0);
        let values = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Grid::new(georef, -9999.0, values).unwrap()
    }

    fn fix_at(lat: f64, lon: f64) -> TrackPoint {
        TrackPoint {
            timestamp: NaiveDate::from_ymd_opt(2023, 6, 15)
                .unwrap()
                .and_hms_opt(3, 0, 0)
                .unwrap()
                .and_utc()
                .with_timezone(&Utc),
            lat,
            lon,
            label: "ESCS".into(),
        }
    }

    #[test]
    fn mask_config_defaults_match_the_pipeline_defaults() {
        let config = MaskConfig::default();
        assert_eq!(config.threshold_mm, 0.9);
        assert_eq!(config.trace_mm, 0.1);
        assert_eq!(config.connectivity, Connectivity::Four);
    }

    #[test]
    fn all_nodata_grid_masks_to_all_false() {
        let g = grid_from(&[&[-9999.0, -9999.0], &[-9999.0, -9999.0]]);
        let mask = make_mask(&g, 0.9);
        assert_eq!(mask.count_ones(), 0);
    }

    #[test]
    fn threshold_is_strict() {
        let g = grid_from(&[&[0.89, 0.9, 0.91]]);
        let mask = make_mask(&g, 0.9);
        assert_eq!(mask.bits(), &[false, false, true]);
    }

    #[test]
    fn mask_popcount_matches_a_per_cell_count() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let georef = GeoRef::geographic(25, 25, 0.0, 0.0, 0.1);
        let values: Vec<f64> = (0..georef.len())
            .map(|_| {
                if rng.gen_bool(0.07) {
                    -9999.0
                } else {
                    rng.gen_range(0.0..2.0)
                }
            })
            .collect();
        let g = Grid::new(georef, -9999.0, values.clone()).unwrap();
        let mask = make_mask(&g, 0.9);
        let expect = values.iter().filter(|&&v| v != -9999.0 && v > 0.9).count();
        assert_eq!(mask.count_ones(), expect);
    }

    #[test]
    fn fix_inside_a_component_selects_it() {
        // three components; the fix lands inside the middle one
        let g = grid_from(&[
            &[5.0, 0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 5.0, 0.0, 0.0],
            &[0.0, 0.0, 5.0, 0.0, 5.0],
        ]);
        let labeled = label_components(&make_mask(&g, 0.9), Connectivity::Four);
        assert_eq!(labeled.component_count(), 3);
        // center of cell (1, 2) is lat 1.5, lon 2.5
        let cluster = select_cyclone_cluster(&labeled, &fix_at(1.5, 2.5), &g).unwrap();
        assert_eq!(cluster.label, 2);
        assert_eq!(cluster.pixels, vec![(1, 2), (2, 2)]);
    }

    #[test]
    fn fix_on_background_selects_the_nearest_component() {
        let g = grid_from(&[&[5.0, 0.0, 0.0, 0.0, 5.0], &[0.0, 0.0, 0.0, 0.0, 0.0]]);
        let labeled = label_components(&make_mask(&g, 0.9), Connectivity::Four);
        // background cell (1, 3), center lat 0.5 lon 3.5: nearer the east blob
        let cluster = select_cyclone_cluster(&labeled, &fix_at(0.5, 3.5), &g).unwrap();
        assert_eq!(cluster.pixels, vec![(0, 4)]);
    }

    #[test]
    fn equidistant_single_pixels_tie_break_to_the_smaller_label() {
        let g = grid_from(&[&[5.0, 0.0, 0.0, 0.0, 5.0]]);
        let labeled = label_components(&make_mask(&g, 0.9), Connectivity::Four);
        // center column, same latitude: exactly equidistant from both pixels
        let cluster = select_cyclone_cluster(&labeled, &fix_at(0.5, 2.5), &g).unwrap();
        assert_eq!(cluster.label, 1);
    }

    #[test]
    fn distance_ties_prefer_the_larger_component() {
        let g = grid_from(&[&[5.0, 0.0, 5.0, 5.0]]);
        let labeled = label_components(&make_mask(&g, 0.9), Connectivity::Four);
        // cell (0,1) is equidistant from pixels (0,0) and (0,2); label 2 is bigger
        let cluster = select_cyclone_cluster(&labeled, &fix_at(0.5, 1.5), &g).unwrap();
        assert_eq!(cluster.label, 2);
        assert_eq!(cluster.pixel_count(), 2);
    }

    #[test]
    fn no_components_is_the_no_cluster_error() {
        let g = grid_from(&[&[0.0, 0.0]]);
        let labeled = label_components(&make_mask(&g, 0.9), Connectivity::Four);
        let err = select_cyclone_cluster(&labeled, &fix_at(0.5, 0.5), &g).unwrap_err();
        assert_eq!(err.to_string(), "no precipitation cluster on this day");
    }

    #[test]
    fn fix_outside_the_extent_is_rejected() {
        let g = grid_from(&[&[5.0, 0.0]]);
        let labeled = label_components(&make_mask(&g, 0.9), Connectivity::Four);
        assert!(select_cyclone_cluster(&labeled, &fix_at(40.0, 40.0), &g).is_err());
    }

    #[test]
    fn extraction_keeps_cluster_values_and_blanks_the_rest() {
        let g = grid_from(&[&[5.0, 1.0], &[0.5, 7.0]]);
        let cluster = Cluster {
            label: 1,
            pixels: vec![(0, 0), (1, 1)],
            source_day: "D1".into(),
        };
        let out = extract_cluster_grid(&g, &cluster);
        assert_eq!(out.value(0, 0), 5.0);
        assert_eq!(out.value(1, 1), 7.0);
        assert!(out.is_nodata(0, 1));
        assert!(out.is_nodata(1, 0));

        // sum over the output equals the sum over the cluster pixels
        let sum: f64 = out.values().iter().filter(|&&v| v != -9999.0).sum();
        let oracle: f64 = cluster.pixels.iter().map(|&(r, c)| g.value(r, c)).sum();
        assert_eq!(sum, oracle);
    }

    #[test]
    fn cluster_covering_everything_extracts_the_identical_grid() {
        let g = grid_from(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let pixels = (0..2).flat_map(|r| (0..2).map(move |c| (r, c))).collect();
        let cluster = Cluster {
            label: 1,
            pixels,
            source_day: String::new(),
        };
        assert_eq!(extract_cluster_grid(&g, &cluster), g);
    }

    #[test]
    fn cluster_count_never_exceeds_mask_count() {
        let g = grid_from(&[&[5.0, 0.0, 5.0], &[5.0, 0.0, 0.0]]);
        let mask = make_mask(&g, 0.9);
        let labeled = label_components(&mask, Connectivity::Four);
        let cluster = select_cyclone_cluster(&labeled, &fix_at(1.5, 0.5), &g).unwrap();
        let (mask_count, cluster_count) = pixel_counts(&mask, &cluster);
        assert_eq!(mask_count, 3);
        assert_eq!(cluster_count, 2);
        assert!(cluster_count < mask_count);
    }
}
