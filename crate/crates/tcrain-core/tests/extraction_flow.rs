//! Library-level flow test: synthetic field through mask, labeling,
//! selection, extraction, zonal statistics and footprint, run in both
//! scalar types.

use chrono::{TimeZone, Utc};
use tcrain_core::{
    assign_zones, cluster_centroid, cluster_mean, extract_cluster_grid, footprint_area,
    label_components, make_mask, read_geojson_polygons, select_cyclone_cluster, union_footprint,
    write_stats_csv, zonal_stats, AreaModel, BlobSpec, Connectivity, GeoRef, Scalar, TrackPoint,
};

fn blobs() -> Vec<BlobSpec> {
    vec![
        BlobSpec {
            id: "cyclone".into(),
            center_lat: 8.0,
            center_lon: 66.0,
            amplitude_mm: 24.0,
            sigma_deg: 0.5,
        },
        BlobSpec {
            id: "band".into(),
            center_lat: 4.0,
            center_lon: 76.0,
            amplitude_mm: 12.0,
            sigma_deg: 0.5,
        },
    ]
}

fn zones() -> tcrain_core::PolygonSet {
    read_geojson_polygons(
        r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"name":"west"},
             "geometry":{"type":"Polygon","coordinates":[[[60,0],[70,0],[70,12],[60,12],[60,0]]]}},
            {"type":"Feature","properties":{"name":"east"},
             "geometry":{"type":"Polygon","coordinates":[[[70,0],[80,0],[80,12],[70,12],[70,0]]]}}]}"#,
    )
    .unwrap()
}

fn fix() -> TrackPoint {
    TrackPoint {
        timestamp: Utc.with_ymd_and_hms(2023, 6, 10, 3, 0, 0).unwrap(),
        lat: 8.0,
        lon: 66.0,
        label: "ESCS".into(),
    }
}

/// Runs the whole chain for one scalar type; returns the cluster mean, count,
/// west-zone area and footprint total.
fn run_flow<T: Scalar>() -> (f64, usize, f64, f64) {
    let georef = GeoRef::geographic(200, 120, 60.0, 0.0, 0.1);
    let (grid, _) =
        tcrain_core::render_field::<T>(&blobs(), georef, T::from_f64_lossy(-9999.0)).unwrap();
    let mask = make_mask(&grid, T::from_f64_lossy(0.9));
    let labeled = label_components(&mask, Connectivity::Four);
    assert_eq!(labeled.component_count(), 2);

    let cluster = select_cyclone_cluster(&labeled, &fix(), &grid).unwrap();
    let extracted = extract_cluster_grid(&grid, &cluster);
    let (mean, count) = cluster_mean(&extracted, T::from_f64_lossy(0.1));

    let centroid = cluster_centroid(&cluster, &grid).unwrap();
    assert!((centroid.0 - 8.0).abs() < 0.1 && (centroid.1 - 66.0).abs() < 0.1);

    let zone_map = assign_zones(georef, &zones()).unwrap();
    let model = AreaModel::default();
    let stats = zonal_stats(&extracted, &zone_map, T::from_f64_lossy(0.1), &model).unwrap();
    assert_eq!(stats.len(), 2);
    // the cyclone sits fully inside the west zone
    assert_eq!(stats[0].significant_pixels, count);
    assert_eq!(stats[1].significant_pixels, 0);
    assert!(stats[0].mean_mm.unwrap() <= stats[0].max_mm.unwrap());

    let fp = union_footprint(&[("D1".into(), cluster.to_mask(georef).unwrap())]).unwrap();
    let areas = footprint_area(&fp, &zone_map, &model).unwrap();
    assert_eq!(areas.total_km2, stats[0].area_km2 + stats[1].area_km2);

    // stats rows serialize without losing the zone split
    let csv = write_stats_csv(&stats);
    assert_eq!(csv.lines().count(), 3);

    (mean.unwrap(), count, stats[0].area_km2, areas.total_km2)
}

#[test]
fn f32_and_f64_agree_through_the_whole_chain() {
    let (mean64, count64, area64, total64) = run_flow::<f64>();
    let (mean32, count32, area32, total32) = run_flow::<f32>();

    // identical pixel sets; float rounding only moves the aggregates slightly
    assert_eq!(count64, count32);
    assert!(
        (mean64 - mean32).abs() < 1e-4 * mean64,
        "{mean64} vs {mean32}"
    );
    assert_eq!(area64, area32); // areas derive from coordinates, always f64
    assert_eq!(total64, total32);
    assert!(count64 > 0);
}
