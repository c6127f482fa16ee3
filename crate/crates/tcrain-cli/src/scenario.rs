//! Synthetic end-to-end scenario: blob fields for N days, a straight-line
//! track through the cyclone blob centers, rectangular zones, a ready-to-run
//! config and a ground-truth sidecar computed independently of the pipeline.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;
use serde_json::json;
use tcrain_core::sigfig::quantize_sig;
use tcrain_core::{write_ascii_grid, BlobSpec, GeoRef, Grid, GridF64};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct ScenarioParams {
    pub days: usize,
    pub size: usize,
    pub cellsize_deg: f64,
    pub seed: u64,
    pub distractor: bool,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            days: 3,
            size: 80,
            cellsize_deg: 0.1,
            seed: 42,
            distractor: true,
        }
    }
}

const NODATA: f64 = -9999.0;
const THRESHOLD_MM: f64 = 0.9;
const TRACE_MM: f64 = 0.1;
const START_DATE: (i32, u32, u32) = (2023, 6, 7);

/// Ground truth for one day, computed straight from the quantized field and
/// the owner map (no pipeline code involved).
#[derive(Debug, Clone, Serialize)]
pub struct DayTruth {
    pub day_id: String,
    pub date: NaiveDate,
    pub fix_lat: f64,
    pub fix_lon: f64,
    pub mask_pixels: usize,
    pub cluster_pixels: usize,
    /// Super-threshold pixels owned by each blob, in blob order.
    pub owner_counts: Vec<(String, usize)>,
    pub cluster_mean_mm: f64,
    pub cluster_max_mm: f64,
    pub centroid_lat: f64,
    pub centroid_lon: f64,
    pub zone_pixels: Vec<(String, usize)>,
    pub zone_means: Vec<(String, Option<f64>)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundTruth {
    pub blobs_per_day: Vec<Vec<BlobSpec>>,
    pub threshold_mm: f64,
    pub trace_mm: f64,
    pub days: Vec<DayTruth>,
}

struct RectZone {
    name: String,
    west: f64,
    east: f64,
    south: f64,
    north: f64,
}

impl RectZone {
    /// Half-open on the east and north edges, matching what even-odd ray
    /// casting yields for an axis-aligned rectangle.
    fn contains(&self, lat: f64, lon: f64) -> bool {
        lon >= self.west && lon < self.east && lat >= self.south && lat < self.north
    }

    fn geojson_feature(&self) -> serde_json::Value {
        let (w, e, s, n) = (self.west, self.east, self.south, self.north);
        json!({
            "type": "Feature",
            "properties": {"name": self.name},
            "geometry": {
                "type": "Polygon",
                "coordinates": [[[w, s], [e, s], [e, n], [w, n], [w, s]]]
            }
        })
    }
}

/// Deterministic unit jitter derived from the seed, no RNG dependency.
fn jitter(seed: u64, salt: u64) -> f64 {
    let mut x = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(salt);
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51afd7ed558ccd);
    x ^= x >> 33;
    (x % 10_000) as f64 / 10_000.0
}

pub fn generate_scenario(params: &ScenarioParams, out_dir: &Path) -> CliResult<Vec<String>> {
    if params.days == 0 || params.size < 16 {
        return Err(CliError::Config(
            "synth needs at least 1 day and size >= 16".into(),
        ));
    }
    if !(params.cellsize_deg > 0.0) {
        return Err(CliError::Config("cellsize must be positive".into()));
    }
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Processing(format!("{}: {e}", out_dir.display())))?;

    let extent = params.size as f64 * params.cellsize_deg;
    let (center_lat, center_lon) = (10.0, 70.0);
    let xll = center_lon - extent / 2.0;
    let yll = center_lat - extent / 2.0;
    let georef = GeoRef::geographic(params.size, params.size, xll, yll, params.cellsize_deg);
    let sigma = 0.03 * extent * (1.0 + 0.2 * jitter(params.seed, 1));
    let amp_cyclone = 24.0 * (1.0 + 0.3 * jitter(params.seed, 2));
    let amp_distractor = 12.0 * (1.0 + 0.3 * jitter(params.seed, 3));

    let frac = |d: usize, from: f64, to: f64| {
        if params.days == 1 {
            (from + to) / 2.0
        } else {
            from + (to - from) * d as f64 / (params.days - 1) as f64
        }
    };

    let zones = vec![
        RectZone {
            name: "west_box".into(),
            west: xll + 0.05 * extent,
            east: center_lon,
            south: yll + 0.05 * extent,
            north: yll + 0.95 * extent,
        },
        RectZone {
            name: "east_box".into(),
            west: center_lon,
            east: xll + 0.95 * extent,
            south: yll + 0.05 * extent,
            north: yll + 0.95 * extent,
        },
    ];

    let start_date = NaiveDate::from_ymd_opt(START_DATE.0, START_DATE.1, START_DATE.2)
        .expect("valid start date");
    let mut track_csv = String::from("timestamp,lat,lon,label\n");
    let mut day_configs = Vec::new();
    let mut blobs_per_day = Vec::new();
    let mut day_truths = Vec::new();
    let mut written = Vec::new();

    for d in 0..params.days {
        let day_id = format!("D{}", d + 1);
        let date = start_date + chrono::Duration::days(d as i64);
        let cyclone = BlobSpec {
            id: "cyclone".into(),
            center_lat: yll + extent * frac(d, 0.30, 0.70),
            center_lon: xll + extent * frac(d, 0.25, 0.65),
            amplitude_mm: amp_cyclone,
            sigma_deg: sigma,
        };
        let mut blobs = vec![cyclone.clone()];
        if params.distractor {
            blobs.push(BlobSpec {
                id: "monsoon_band".into(),
                center_lat: yll + extent * 0.15,
                center_lon: xll + extent * 0.85,
                amplitude_mm: amp_distractor,
                sigma_deg: sigma,
            });
        }

        let (raw, owners) = tcrain_core::render_field::<f64>(&blobs, georef, NODATA)
            .map_err(|e| CliError::Processing(format!("{day_id}: {e}")))?;
        // quantize to the serialized precision so the sidecar matches the
        // values the pipeline will read back
        let quantized: Vec<f64> = raw.values().iter().map(|&v| quantize_sig(v, 6)).collect();
        let grid: GridF64 = Grid::new(georef, NODATA, quantized)
            .map_err(|e| CliError::Processing(format!("{day_id}: {e}")))?;

        day_truths.push(day_truth(&day_id, date, &blobs, &grid, &owners, &zones));

        track_csv.push_str(&format!(
            "{}T03:00:00Z,{},{},CS\n",
            date, cyclone.center_lat, cyclone.center_lon
        ));

        let grid_name = format!("{day_id}.asc");
        let grid_path = out_dir.join(&grid_name);
        fs::write(&grid_path, write_ascii_grid(&grid))
            .map_err(|e| CliError::Processing(format!("{}: {e}", grid_path.display())))?;
        written.push(grid_name.clone());
        day_configs.push(json!({
            "day_id": day_id,
            "date": date,
            "grid_path": grid_name,
        }));
        blobs_per_day.push(blobs);
    }

    let boundaries = json!({
        "type": "FeatureCollection",
        "features": zones.iter().map(RectZone::geojson_feature).collect::<Vec<_>>(),
    });
    let config = json!({
        "days": day_configs,
        "track_path": "track.csv",
        "boundaries_path": "boundaries.geojson",
        "study_bounds": {"west": xll, "east": xll + extent, "south": yll, "north": yll + extent},
        "trace_mm": TRACE_MM,
        "default_threshold_mm": THRESHOLD_MM,
        "reproject": false,
        "sphere_radius_km": 6371.0
    });
    let truth = GroundTruth {
        blobs_per_day,
        threshold_mm: THRESHOLD_MM,
        trace_mm: TRACE_MM,
        days: day_truths,
    };

    for (name, text) in [
        ("track.csv".to_string(), track_csv),
        ("boundaries.geojson".to_string(), pretty(&boundaries)?),
        ("config.json".to_string(), pretty(&config)?),
        (
            "ground_truth.json".to_string(),
            pretty(&serde_json::to_value(&truth).map_err(internal)?)?,
        ),
    ] {
        let path = out_dir.join(&name);
        fs::write(&path, text)
            .map_err(|e| CliError::Processing(format!("{}: {e}", path.display())))?;
        written.push(name);
    }
    Ok(written)
}

fn pretty(v: &serde_json::Value) -> CliResult<String> {
    serde_json::to_string_pretty(v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(internal)
}

fn internal(e: serde_json::Error) -> CliError {
    CliError::Processing(format!("serialize: {e}"))
}

/// Independent per-day oracle: mask/cluster membership from the owner map and
/// threshold comparison, zone membership from rectangle containment.
fn day_truth(
    day_id: &str,
    date: NaiveDate,
    blobs: &[BlobSpec],
    grid: &GridF64,
    owners: &[u32],
    zones: &[RectZone],
) -> DayTruth {
    let cyclone = &blobs[0];
    let georef = grid.georef();
    let mut mask_pixels = 0usize;
    let mut cluster_pixels = 0usize;
    let mut owner_counts = vec![0usize; blobs.len()];
    let mut sum = 0.0;
    let mut max = f64::NEG_INFINITY;
    let mut lat_sum = 0.0;
    let mut lon_sum = 0.0;
    let mut zone_counts = vec![0usize; zones.len()];
    let mut zone_sums = vec![0.0f64; zones.len()];

    for row in 0..georef.nrows {
        for col in 0..georef.ncols {
            let v = grid.value(row, col);
            if !(v > THRESHOLD_MM) {
                continue;
            }
            mask_pixels += 1;
            owner_counts[owners[georef.index(row, col)] as usize] += 1;
            if owners[georef.index(row, col)] != 0 {
                continue;
            }
            cluster_pixels += 1;
            sum += v;
            max = max.max(v);
            let (lat, lon) = georef.cell_center(row, col).expect("in range");
            lat_sum += lat;
            lon_sum += lon;
            for (zi, zone) in zones.iter().enumerate() {
                if zone.contains(lat, lon) {
                    zone_counts[zi] += 1;
                    zone_sums[zi] += v;
                    break;
                }
            }
        }
    }

    let n = cluster_pixels.max(1) as f64;
    DayTruth {
        day_id: day_id.to_string(),
        date,
        fix_lat: cyclone.center_lat,
        fix_lon: cyclone.center_lon,
        mask_pixels,
        cluster_pixels,
        owner_counts: blobs
            .iter()
            .zip(&owner_counts)
            .map(|(b, &c)| (b.id.clone(), c))
            .collect(),
        cluster_mean_mm: sum / n,
        cluster_max_mm: max,
        centroid_lat: lat_sum / n,
        centroid_lon: lon_sum / n,
        zone_pixels: zones
            .iter()
            .zip(&zone_counts)
            .map(|(z, &c)| (z.name.clone(), c))
            .collect(),
        zone_means: zones
            .iter()
            .zip(&zone_counts)
            .zip(&zone_sums)
            .map(|((z, &c), &s)| (z.name.clone(), (c > 0).then(|| s / c as f64)))
            .collect(),
    }
}
