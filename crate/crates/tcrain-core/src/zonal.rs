//! Zone rasterization and per-zone rainfall statistics over an extracted
//! cluster grid.

use chrono::NaiveDate;

use crate::area::{cell_area, AreaModel};
use crate::boundaries::PolygonSet;
use crate::cluster::Cluster;
use crate::error::{Error, Result};
use crate::grid::{GeoRef, Grid};
use crate::scalar::Scalar;

/// Raster of zone indices aligned with a grid; -1 marks cells in no zone.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneMap {
    georef: GeoRef,
    indices: Vec<i32>,
    zone_names: Vec<String>,
}

impl ZoneMap {
    pub fn georef(&self) -> GeoRef {
        self.georef
    }

    #[inline]
    pub fn zone_index(&self, row: usize, col: usize) -> i32 {
        self.indices[self.georef.index(row, col)]
    }

    pub fn indices(&self) -> &[i32] {
        &self.indices
    }

    pub fn zone_names(&self) -> &[String] {
        &self.zone_names
    }
}

/// Assign each cell center to the first zone (in file order) containing it,
/// by even-odd ray casting.
///
/// Rasterizes one zone at a time with a row scanline: the zone's edge
/// crossings with the row's center latitude are computed once and shared by
/// every column, which keeps large boundary files (thousands of edges)
/// linear per row instead of per cell. A cell center is inside when an odd
/// number of crossings lie strictly to its east, exactly the per-point rule
/// of [`crate::boundaries::Zone::contains`].
pub fn assign_zones(georef: GeoRef, polys: &PolygonSet) -> Result<ZoneMap> {
    georef.require_geographic()?;
    georef.validate()?;
    let zones = polys.zones();

    let mut indices = vec![-1i32; georef.len()];
    let mut crossings: Vec<f64> = Vec::new();
    for (zi, zone) in zones.iter().enumerate() {
        let (_, _, zone_south, zone_north) = zone.bounding_box();
        for row in 0..georef.nrows {
            let (lat, _) = georef.cell_center_unchecked(row, 0);
            if lat < zone_south || lat > zone_north {
                continue;
            }
            crossings.clear();
            for polygon in &zone.polygons {
                for ring in &polygon.rings {
                    for ((x1, y1), (x2, y2)) in ring.edges() {
                        if (y1 > lat) != (y2 > lat) {
                            crossings.push(x1 + (lat - y1) * (x2 - x1) / (y2 - y1));
                        }
                    }
                }
            }
            if crossings.is_empty() {
                continue;
            }
            crossings.sort_unstable_by(f64::total_cmp);

            // walk the row west to east, tracking how many crossings remain east
            let mut next = 0usize;
            for col in 0..georef.ncols {
                let lon = georef.xll + (col as f64 + 0.5) * georef.cellsize;
                while next < crossings.len() && crossings[next] <= lon {
                    next += 1;
                }
                if (crossings.len() - next) % 2 == 1 {
                    let i = georef.index(row, col);
                    if indices[i] < 0 {
                        indices[i] = zi as i32;
                    }
                }
            }
        }
    }
    Ok(ZoneMap {
        georef,
        indices,
        zone_names: zones.iter().map(|z| z.name.clone()).collect(),
    })
}

/// Simple mean over the significant cells (valid and strictly above `trace`),
/// with the significant-cell count. The mean is absent when nothing is
/// significant.
pub fn cluster_mean<T: Scalar>(cluster_grid: &Grid<T>, trace: T) -> (Option<f64>, usize) {
    let mut sum = 0.0;
    let mut count = 0usize;
    for &v in cluster_grid.values() {
        if v != cluster_grid.nodata() && v > trace {
            sum += v.as_f64();
            count += 1;
        }
    }
    if count == 0 {
        (None, 0)
    } else {
        (Some(sum / count as f64), count)
    }
}

/// Per-day, per-zone aggregates over significant cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneStats {
    /// Stamped by the pipeline; empty when computed standalone.
    pub day_id: String,
    pub date: Option<NaiveDate>,
    pub zone: String,
    pub mean_mm: Option<f64>,
    pub max_mm: Option<f64>,
    /// Cell center of the maximum, `(lat, lon)`; row-major first occurrence on ties.
    pub max_point: Option<(f64, f64)>,
    pub significant_pixels: usize,
    pub area_km2: f64,
}

impl ZoneStats {
    pub fn stamped(mut self, day_id: &str, date: NaiveDate) -> Self {
        self.day_id = day_id.to_string();
        self.date = Some(date);
        self
    }
}

struct ZoneAccumulator {
    sum: f64,
    count: usize,
    max: f64,
    max_point: Option<(f64, f64)>,
    area_km2: f64,
}

impl ZoneAccumulator {
    fn new() -> Self {
        Self {
            sum: 0.0,
            count: 0,
            max: f64::NEG_INFINITY,
            max_point: None,
            area_km2: 0.0,
        }
    }
}

/// Zonal statistics of a cluster grid: per zone, the simple mean, maximum
/// value and its location, significant-cell count, and summed cell area.
/// Output rows follow the zone order of the map.
pub fn zonal_stats<T: Scalar>(
    cluster_grid: &Grid<T>,
    zone_map: &ZoneMap,
    trace: T,
    model: &AreaModel,
) -> Result<Vec<ZoneStats>> {
    cluster_grid
        .georef()
        .require_same(&zone_map.georef(), "cluster grid vs zone map")
        .map_err(|e| Error::ShapeMismatch(e.to_string()))?;

    let georef = cluster_grid.georef();
    let mut acc: Vec<ZoneAccumulator> = (0..zone_map.zone_names().len())
        .map(|_| ZoneAccumulator::new())
        .collect();

    for row in 0..georef.nrows {
        for col in 0..georef.ncols {
            let zi = zone_map.zone_index(row, col);
            if zi < 0 {
                continue;
            }
            let Some(v) = cluster_grid.get(row, col) else {
                continue;
            };
            if !(v > trace) {
                continue;
            }
            let v = v.as_f64();
            let (lat, lon) = georef.cell_center_unchecked(row, col);
            let a = &mut acc[zi as usize];
            a.sum += v;
            a.count += 1;
            a.area_km2 += cell_area(lat, georef.cellsize, model)?;
            if v > a.max {
                a.max = v;
                a.max_point = Some((lat, lon));
            }
        }
    }

    Ok(zone_map
        .zone_names()
        .iter()
        .zip(acc)
        .map(|(name, a)| ZoneStats {
            day_id: String::new(),
            date: None,
            zone: name.clone(),
            mean_mm: (a.count > 0).then(|| a.sum / a.count as f64),
            max_mm: (a.count > 0).then_some(a.max),
            max_point: a.max_point,
            significant_pixels: a.count,
            area_km2: a.area_km2,
        })
        .collect())
}

/// Unweighted mean of the cluster's pixel-center coordinates, `(lat, lon)`.
pub fn cluster_centroid<T: Scalar>(cluster: &Cluster, grid: &Grid<T>) -> Result<(f64, f64)> {
    if cluster.pixels.is_empty() {
        return Err(Error::InvalidArgument("cluster has no pixels".into()));
    }
    let georef = grid.georef();
    georef.require_geographic()?;
    let mut lat_sum = 0.0;
    let mut lon_sum = 0.0;
    for &(row, col) in &cluster.pixels {
        let (lat, lon) = georef.cell_center(row, col)?;
        lat_sum += lat;
        lon_sum += lon;
    }
    let n = cluster.pixels.len() as f64;
    Ok((lat_sum / n, lon_sum / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundaries::read_geojson_polygons;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn square_zone(name: &str, w: f64, s: f64, e: f64, n: f64) -> String {
        format!(
            r#"{{"type":"Feature","properties":{{"name":"{name}"}},
                "geometry":{{"type":"Polygon","coordinates":[[[{w},{s}],[{e},{s}],[{e},{n}],[{w},{n}],[{w},{s}]]]}}}}"#
        )
    }

    fn polyset(features: &[String]) -> PolygonSet {
        let doc = format!(
            r#"{{"type":"FeatureCollection","features":[{}]}}"#,
            features.join(",")
        );
        read_geojson_polygons(&doc).unwrap()
    }

    #[test]
    fn unit_square_contains_its_center_cell() {
        let set = polyset(&[square_zone("Z", 0.0, 0.0, 1.0, 1.0)]);
        let georef = GeoRef::geographic(2, 1, 0.0, 0.0, 1.0);
        let map = assign_zones(georef, &set).unwrap();
        // centers (0.5, 0.5) and (0.5, 1.5)
        assert_eq!(map.zone_index(0, 0), 0);
        assert_eq!(map.zone_index(0, 1), -1);
    }

    #[test]
    fn overlapping_zones_resolve_to_file_order() {
        let set = polyset(&[
            square_zone("first", 0.0, 0.0, 2.0, 2.0),
            square_zone("second", 0.0, 0.0, 4.0, 4.0),
        ]);
        let georef = GeoRef::geographic(4, 4, 0.0, 0.0, 1.0);
        let map = assign_zones(georef, &set).unwrap();
        assert_eq!(map.zone_index(3, 0), 0); // lat 0.5 lon 0.5: both match, first wins
        assert_eq!(map.zone_index(0, 3), 1); // lat 3.5 lon 3.5: only the big one
    }

    /// Winding-number containment, an independent reimplementation.
    fn winding_contains(ring: &[(f64, f64)], lon: f64, lat: f64) -> bool {
        let mut wn = 0i32;
        for w in ring.windows(2) {
            let ((x1, y1), (x2, y2)) = (w[0], w[1]);
            let is_left = (x2 - x1) * (lat - y1) - (lon - x1) * (y2 - y1);
            if y1 <= lat {
                if y2 > lat && is_left > 0.0 {
                    wn += 1;
                }
            } else if y2 <= lat && is_left < 0.0 {
                wn -= 1;
            }
        }
        wn != 0
    }

    #[test]
    fn ray_casting_matches_a_winding_number_oracle_on_random_convex_polygons() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            // convex polygon: points on an ellipse, in angular order
            let cx = rng.gen_range(-10.0..10.0);
            let cy = rng.gen_range(-10.0..10.0);
            let rx = rng.gen_range(1.0..6.0);
            let ry = rng.gen_range(1.0..6.0);
            let sides = rng.gen_range(3..9usize);
            let mut ring: Vec<(f64, f64)> = (0..sides)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / sides as f64;
                    (cx + rx * t.cos(), cy + ry * t.sin())
                })
                .collect();
            ring.push(ring[0]);

            let feature = format!(
                r#"{{"type":"Feature","properties":{{"name":"Z"}},
                    "geometry":{{"type":"Polygon","coordinates":[[{}]]}}}}"#,
                ring.iter()
                    .map(|(x, y)| format!("[{x},{y}]"))
                    .collect::<Vec<_>>()
                    .join(",")
            );
            let set = polyset(&[feature]);
            let zone = &set.zones()[0];

            for _ in 0..200 {
                let lon = rng.gen_range(-20.0..20.0);
                let lat = rng.gen_range(-20.0..20.0);
                // skip points too close to an edge for the oracles to disagree legitimately
                let near_edge = ring.windows(2).any(|w| {
                    let ((x1, y1), (x2, y2)) = (w[0], w[1]);
                    let (dx, dy) = (x2 - x1, y2 - y1);
                    let t =
                        (((lon - x1) * dx + (lat - y1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
                    let (px, py) = (x1 + t * dx, y1 + t * dy);
                    ((lon - px).powi(2) + (lat - py).powi(2)).sqrt() < 1e-9
                });
                if near_edge {
                    continue;
                }
                assert_eq!(
                    zone.contains(lon, lat),
                    winding_contains(&ring, lon, lat),
                    "point ({lon}, {lat}) in {ring:?}"
                );
            }
        }
    }

    #[test]
    fn scanline_matches_per_point_containment_on_star_polygons() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let georef = GeoRef::geographic(48, 48, -12.0, -12.0, 0.5);
        for case in 0..25 {
            // star polygon: random radius per angle, usually non-convex
            let spikes = rng.gen_range(5..14usize);
            let mut ring: Vec<(f64, f64)> = (0..spikes)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / spikes as f64;
                    let r = rng.gen_range(1.0..9.0);
                    (r * t.cos(), r * t.sin())
                })
                .collect();
            ring.push(ring[0]);
            let feature = format!(
                r#"{{"type":"Feature","properties":{{"name":"star"}},
                    "geometry":{{"type":"Polygon","coordinates":[[{}]]}}}}"#,
                ring.iter()
                    .map(|(x, y)| format!("[{x},{y}]"))
                    .collect::<Vec<_>>()
                    .join(",")
            );
            let set = polyset(&[feature]);
            let map = assign_zones(georef, &set).unwrap();
            let zone = &set.zones()[0];
            for row in 0..48 {
                for col in 0..48 {
                    let (lat, lon) = georef.cell_center(row, col).unwrap();
                    let expect = if zone.contains(lon, lat) { 0 } else { -1 };
                    assert_eq!(
                        map.zone_index(row, col),
                        expect,
                        "case {case} ({row},{col})"
                    );
                }
            }
        }
    }

    fn grid_from(values: Vec<f64>, ncols: usize, nrows: usize) -> Grid<f64> {
        Grid::new(
            GeoRef::geographic(ncols, nrows, 0.0, 0.0, 1.0),
            -9999.0,
            values,
        )
        .unwrap()
    }

    #[test]
    fn trace_cutoff_is_strict() {
        let g = grid_from(vec![0.05, 0.2, 5.0], 3, 1);
        let (mean, count) = cluster_mean(&g, 0.1);
        assert_eq!(count, 2);
        assert!((mean.unwrap() - 2.6).abs() < 1e-12);
    }

    #[test]
    fn trace_cutoff_works_for_f32_grids_too() {
        let georef = GeoRef::geographic(3, 1, 0.0, 0.0, 1.0);
        let g = Grid::new(georef, -9999.0f32, vec![0.05f32, 0.2, 5.0]).unwrap();
        let (mean, count) = cluster_mean(&g, 0.1f32);
        assert_eq!(count, 2);
        assert!((mean.unwrap() - 2.6).abs() < 1e-6);
    }

    #[test]
    fn all_trace_means_absent() {
        let g = grid_from(vec![0.05, 0.1, 0.0], 3, 1);
        let (mean, count) = cluster_mean(&g, 0.1);
        assert_eq!(count, 0);
        assert_eq!(mean, None);
    }

    #[test]
    fn single_all_covering_zone_reduces_to_cluster_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let values: Vec<f64> = (0..64).map(|_| rng.gen_range(0.0..3.0)).collect();
        let g = grid_from(values, 8, 8);
        let set = polyset(&[square_zone("all", -1.0, -1.0, 9.0, 9.0)]);
        let map = assign_zones(g.georef(), &set).unwrap();
        let stats = zonal_stats(&g, &map, 0.1, &AreaModel::default()).unwrap();
        let (mean, count) = cluster_mean(&g, 0.1);
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].mean_mm, mean);
        assert_eq!(stats[0].significant_pixels, count);
    }

    #[test]
    fn matches_a_per_pixel_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..25 {
            let ncols = 16;
            let nrows = 16;
            let values: Vec<f64> = (0..ncols * nrows)
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        -9999.0
                    } else {
                        (rng.gen_range(0.0f64..4.0) * 1000.0).round() / 1000.0
                    }
                })
                .collect();
            let g = grid_from(values, ncols, nrows);

            // three random cell-aligned rectangular zones (may overlap)
            let mut features = Vec::new();
            for zi in 0..3 {
                let w = rng.gen_range(0..ncols - 1) as f64;
                let e = rng.gen_range(w as usize + 1..=ncols) as f64;
                let s = rng.gen_range(0..nrows - 1) as f64;
                let n = rng.gen_range(s as usize + 1..=nrows) as f64;
                features.push(square_zone(&format!("z{zi}"), w, s, e, n));
            }
            let set = polyset(&features);
            let map = assign_zones(g.georef(), &set).unwrap();
            let model = AreaModel::default();
            let stats = zonal_stats(&g, &map, 0.1, &model).unwrap();

            // brute force: rectangle containment by coordinate comparison
            let rects: Vec<(f64, f64, f64, f64)> =
                set.zones().iter().map(|z| z.bounding_box()).collect();
            for (zi, st) in stats.iter().enumerate() {
                let mut sum = 0.0;
                let mut count = 0usize;
                let mut max = f64::NEG_INFINITY;
                let mut max_point = None;
                let mut area = 0.0;
                for row in 0..nrows {
                    for col in 0..ncols {
                        let (lat, lon) = g.cell_center(row, col).unwrap();
                        let (w, e, s, n) = rects[zi];
                        let inside = lon > w && lon < e && lat > s && lat < n;
                        let owner = (0..3).find(|&o| {
                            let (w, e, s, n) = rects[o];
                            lon > w && lon < e && lat > s && lat < n
                        });
                        if !inside || owner != Some(zi) {
                            continue;
                        }
                        let v = g.value(row, col);
                        if v == -9999.0 || v <= 0.1 {
                            continue;
                        }
                        sum += v;
                        count += 1;
                        area += cell_area(lat, 1.0, &model).unwrap();
                        if v > max {
                            max = v;
                            max_point = Some((lat, lon));
                        }
                    }
                }
                assert_eq!(st.significant_pixels, count, "zone {zi}");
                assert_eq!(st.max_point, max_point, "zone {zi}");
                if count > 0 {
                    let mean = sum / count as f64;
                    assert!((st.mean_mm.unwrap() - mean).abs() <= 1e-9 * mean.abs().max(1.0));
                    assert!((st.max_mm.unwrap() - max).abs() == 0.0);
                    assert!((st.area_km2 - area).abs() <= 1e-9 * area.max(1.0));
                    assert!(st.mean_mm.unwrap() <= st.max_mm.unwrap() + 1e-15);
                } else {
                    assert_eq!(st.mean_mm, None);
                    assert_eq!(st.max_mm, None);
                    assert_eq!(st.area_km2, 0.0);
                }
            }
        }
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let g = grid_from(vec![1.0; 4], 2, 2);
        let set = polyset(&[square_zone("all", -1.0, -1.0, 9.0, 9.0)]);
        let other = GeoRef::geographic(3, 3, 0.0, 0.0, 1.0);
        let map = assign_zones(other, &set).unwrap();
        let err = zonal_stats(&g, &map, 0.1, &AreaModel::default()).unwrap_err();
        assert!(matches!(err, crate::error::Error::ShapeMismatch(_)));
    }

    #[test]
    fn max_point_ties_resolve_row_major() {
        let g = grid_from(vec![2.0, 1.0, 2.0, 0.0], 2, 2);
        let set = polyset(&[square_zone("all", -1.0, -1.0, 3.0, 3.0)]);
        let map = assign_zones(g.georef(), &set).unwrap();
        let stats = zonal_stats(&g, &map, 0.1, &AreaModel::default()).unwrap();
        // (0,0) and (1,0) share the max; row-major first is (0,0), center (1.5, 0.5)
        assert_eq!(stats[0].max_point, Some((1.5, 0.5)));
    }

    #[test]
    fn centroid_of_single_pixel_is_its_center() {
        let g = grid_from(vec![1.0; 9], 3, 3);
        let cluster = Cluster {
            label: 1,
            pixels: vec![(2, 0)],
            source_day: String::new(),
        };
        assert_eq!(cluster_centroid(&cluster, &g).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn centroid_of_symmetric_block_is_the_center_pixel() {
        let g = grid_from(vec![1.0; 9], 3, 3);
        let pixels = (0..3).flat_map(|r| (0..3).map(move |c| (r, c))).collect();
        let cluster = Cluster {
            label: 1,
            pixels,
            source_day: String::new(),
        };
        let (lat, lon) = cluster_centroid(&cluster, &g).unwrap();
        let (clat, clon) = g.cell_center(1, 1).unwrap();
        assert!((lat - clat).abs() < 1e-12);
        assert!((lon - clon).abs() < 1e-12);
    }

    #[test]
    fn centroid_matches_a_brute_force_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let g = grid_from(vec![1.0; 400], 20, 20);
        let pixels: Vec<(usize, usize)> = (0..50)
            .map(|_| (rng.gen_range(0..20), rng.gen_range(0..20)))
            .collect();
        let cluster = Cluster {
            label: 1,
            pixels: pixels.clone(),
            source_day: String::new(),
        };
        let (lat, lon) = cluster_centroid(&cluster, &g).unwrap();
        let mut lat_sum = 0.0;
        let mut lon_sum = 0.0;
        for (r, c) in &pixels {
            let (la, lo) = g.cell_center(*r, *c).unwrap();
            lat_sum += la;
            lon_sum += lo;
        }
        assert!((lat - lat_sum / 50.0).abs() < 1e-12);
        assert!((lon - lon_sum / 50.0).abs() < 1e-12);
    }
}
