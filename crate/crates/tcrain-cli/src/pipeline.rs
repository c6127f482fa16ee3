//! The full per-day pipeline and its report emission.
//!
//! Each day runs mask -> label -> select -> extract -> stats independently;
//! days fan out to a worker pool and merge back in config order, so outputs
//! are byte-identical regardless of the thread count.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde_json::Value;
use tcrain_core::{
    assign_zones, cluster_centroid, cluster_mean, extract_cluster_grid, footprint_area,
    label_components, make_mask, pixel_counts, read_ascii_grid, read_geojson_polygons,
    read_track_csv, render_bar_chart_svg, reproject_to_geographic, select_cyclone_cluster, subset,
    union_footprint, write_ascii_grid, write_stats_csv, write_summary_json, zonal_stats, AreaMode,
    AreaModel, BinaryMask, Connectivity, Crs, DaySummary, Error, GeoRef, Grid, GridF64, MeanBlock,
    PolygonSet, RunSummary, SinusoidalParams, Track, ZoneMap, ZoneStats,
};

use crate::config::{DayConfig, RunConfig};
use crate::error::{CliError, CliResult};

/// Zone label used for whole-cluster rows in the stats table.
pub const CLUSTER_ZONE: &str = "(cluster)";

#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions {
    pub area_mode: AreaMode,
    pub connectivity: Connectivity,
    pub threads: usize,
}

pub struct DayData {
    pub mask_pixels: usize,
    pub cluster_pixels: usize,
    pub cluster_grid: GridF64,
    pub cluster_mask: BinaryMask,
    pub rows: Vec<ZoneStats>,
    pub cluster_row: ZoneStats,
    pub centroid: (f64, f64),
}

pub enum DayOutcome {
    Extracted(Box<DayData>),
    /// Nothing above the threshold that day; recorded, not fatal.
    NoCluster {
        mask_pixels: usize,
    },
    Failed(String),
}

/// Shared immutable inputs for day workers.
struct RunContext<'a> {
    config: &'a RunConfig,
    track: Track,
    boundaries: PolygonSet,
    options: PipelineOptions,
    model: AreaModel,
    zone_maps: Mutex<Vec<(GeoRef, Arc<ZoneMap>)>>,
}

impl RunContext<'_> {
    /// Zone maps are pure functions of the georeference; cache per georef so
    /// a 14-day run rasterizes the boundaries once.
    fn zone_map_for(&self, georef: GeoRef) -> Result<Arc<ZoneMap>, Error> {
        {
            let cache = self.zone_maps.lock().expect("zone map cache");
            if let Some((_, map)) = cache.iter().find(|(g, _)| *g == georef) {
                return Ok(map.clone());
            }
        }
        let map = Arc::new(assign_zones(georef, &self.boundaries)?);
        let mut cache = self.zone_maps.lock().expect("zone map cache");
        if let Some((_, existing)) = cache.iter().find(|(g, _)| *g == georef) {
            return Ok(existing.clone());
        }
        cache.push((georef, map.clone()));
        Ok(map)
    }
}

/// Load a day's grid and run it through the extraction stages.
pub fn process_day(
    config: &RunConfig,
    day: &DayConfig,
    track: &Track,
    zone_map: impl FnOnce(GeoRef) -> Result<Arc<ZoneMap>, Error>,
    options: &PipelineOptions,
    model: &AreaModel,
) -> DayOutcome {
    match try_process_day(config, day, track, zone_map, options, model) {
        Ok(outcome) => outcome,
        Err(e) => DayOutcome::Failed(e),
    }
}

fn try_process_day(
    config: &RunConfig,
    day: &DayConfig,
    track: &Track,
    zone_map: impl FnOnce(GeoRef) -> Result<Arc<ZoneMap>, Error>,
    options: &PipelineOptions,
    model: &AreaModel,
) -> Result<DayOutcome, String> {
    let stage = |what: &str, e: &dyn std::fmt::Display| format!("{what}: {e}");

    let file = fs::File::open(&day.grid_path)
        .map_err(|e| stage(&format!("grid {}", day.grid_path.display()), &e))?;
    let mut grid: GridF64 = read_ascii_grid(std::io::BufReader::new(file))
        .map_err(|e| stage(&format!("grid {}", day.grid_path.display()), &e))?;

    let bounds = config.geo_bounds().map_err(|e| stage("study_bounds", &e))?;

    if grid.georef().crs == Crs::SinusoidalKm {
        if !config.reproject {
            return Err("sinusoidal input needs \"reproject\": true in the config".into());
        }
        let params = SinusoidalParams {
            sphere_radius_km: config.sphere_radius_km,
        };
        grid = reproject_to_geographic(&grid, bounds, config.reproject_cellsize_deg, &params)
            .map_err(|e| stage("reproject", &e))?;
    }
    let grid = subset(&grid, bounds).map_err(|e| stage("subset", &e))?;

    let threshold = config.threshold_for(day);
    let mask = make_mask(&grid, threshold);
    let labeled = label_components(&mask, options.connectivity);

    let Some(fix) = track.fix_for_date(day.date) else {
        return Err(format!("no track fix within 24 h of {}T03:00Z", day.date));
    };

    let cluster = match select_cyclone_cluster(&labeled, fix, &grid) {
        Ok(mut cluster) => {
            cluster.source_day = day.day_id.clone();
            cluster
        }
        Err(Error::NoCluster) => {
            return Ok(DayOutcome::NoCluster {
                mask_pixels: mask.count_ones(),
            })
        }
        Err(e) => return Err(stage("select cluster", &e)),
    };

    let cluster_grid = extract_cluster_grid(&grid, &cluster);
    let cluster_mask = cluster
        .to_mask(grid.georef())
        .map_err(|e| stage("cluster mask", &e))?;
    let (mask_pixels, cluster_pixels) = pixel_counts(&mask, &cluster);

    let zone_map = zone_map(grid.georef()).map_err(|e| stage("assign zones", &e))?;
    let rows = zonal_stats(&cluster_grid, &zone_map, config.trace_mm, model)
        .map_err(|e| stage("zonal stats", &e))?
        .into_iter()
        .map(|r| r.stamped(&day.day_id, day.date))
        .collect();

    let cluster_row = whole_cluster_row(&cluster_grid, config.trace_mm, model)
        .map_err(|e| stage("cluster stats", &e))?
        .stamped(&day.day_id, day.date);
    let centroid = cluster_centroid(&cluster, &grid).map_err(|e| stage("cluster centroid", &e))?;

    Ok(DayOutcome::Extracted(Box::new(DayData {
        mask_pixels,
        cluster_pixels,
        cluster_grid,
        cluster_mask,
        rows,
        cluster_row,
        centroid,
    })))
}

/// Cluster-wide aggregate row (zone `(cluster)`): the simple mean, maximum
/// and area over every significant cell of the extracted grid.
fn whole_cluster_row(
    cluster_grid: &GridF64,
    trace_mm: f64,
    model: &AreaModel,
) -> Result<ZoneStats, Error> {
    let georef = cluster_grid.georef();
    let (mean, count) = cluster_mean(cluster_grid, trace_mm);
    let mut max = f64::NEG_INFINITY;
    let mut max_point = None;
    let mut area = 0.0;
    for row in 0..georef.nrows {
        for col in 0..georef.ncols {
            let Some(v) = cluster_grid.get(row, col) else {
                continue;
            };
            if !(v > trace_mm) {
                continue;
            }
            let (lat, lon) = cluster_grid.cell_center(row, col)?;
            area += tcrain_core::cell_area(lat, georef.cellsize, model)?;
            if v > max {
                max = v;
                max_point = Some((lat, lon));
            }
        }
    }
    Ok(ZoneStats {
        day_id: String::new(),
        date: None,
        zone: CLUSTER_ZONE.to_string(),
        mean_mm: mean,
        max_mm: (count > 0).then_some(max),
        max_point,
        significant_pixels: count,
        area_km2: area,
    })
}

pub struct RunOutputs {
    pub csv: String,
    pub summary: String,
    pub footprint_grid: Option<String>,
    pub cluster_grids: Vec<(String, String)>,
    pub charts: Vec<(String, String)>,
    pub failures: Vec<(String, String)>,
}

/// Run every configured day and assemble the reports in memory.
pub fn run_pipeline(
    config: &RunConfig,
    raw_config: &Value,
    options: &PipelineOptions,
) -> CliResult<RunOutputs> {
    let track_text = fs::read_to_string(&config.track_path).map_err(|e| {
        CliError::Config(format!("track file {}: {e}", config.track_path.display()))
    })?;
    let track = read_track_csv(&track_text).map_err(|e| {
        CliError::Config(format!("track file {}: {e}", config.track_path.display()))
    })?;
    let boundaries_text = fs::read_to_string(&config.boundaries_path).map_err(|e| {
        CliError::Config(format!(
            "boundaries file {}: {e}",
            config.boundaries_path.display()
        ))
    })?;
    let boundaries = read_geojson_polygons(&boundaries_text).map_err(|e| {
        CliError::Config(format!(
            "boundaries file {}: {e}",
            config.boundaries_path.display()
        ))
    })?;

    let model = AreaModel {
        sphere_radius_km: config.sphere_radius_km,
        mode: options.area_mode,
    };
    let ctx = RunContext {
        config,
        track,
        boundaries,
        options: *options,
        model,
        zone_maps: Mutex::new(Vec::new()),
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads)
        .build()
        .map_err(|e| CliError::Processing(format!("thread pool: {e}")))?;
    let outcomes: Vec<DayOutcome> = pool.install(|| {
        config
            .days
            .par_iter()
            .map(|day| {
                process_day(
                    ctx.config,
                    day,
                    &ctx.track,
                    |georef| ctx.zone_map_for(georef),
                    &ctx.options,
                    &ctx.model,
                )
            })
            .collect()
    });

    assemble_outputs(&ctx, raw_config, outcomes)
}

fn assemble_outputs(
    ctx: &RunContext<'_>,
    raw_config: &Value,
    outcomes: Vec<DayOutcome>,
) -> CliResult<RunOutputs> {
    let config = ctx.config;
    let mut rows: Vec<ZoneStats> = Vec::new();
    let mut per_day: Vec<DaySummary> = Vec::new();
    let mut daily_masks: Vec<(String, BinaryMask)> = Vec::new();
    let mut cluster_grids = Vec::new();
    let mut failures = Vec::new();

    for (day, outcome) in config.days.iter().zip(outcomes) {
        let mut summary = DaySummary {
            day_id: day.day_id.clone(),
            date: day.date,
            mask_pixels: 0,
            cluster_pixels: 0,
            cluster_mean_mm: None,
            cluster_max_mm: None,
            cluster_max_point: None,
            cluster_centroid: None,
            cluster_area_km2: 0.0,
            note: None,
        };
        match outcome {
            DayOutcome::Extracted(data) => {
                summary.mask_pixels = data.mask_pixels;
                summary.cluster_pixels = data.cluster_pixels;
                summary.cluster_mean_mm = data.cluster_row.mean_mm;
                summary.cluster_max_mm = data.cluster_row.max_mm;
                summary.cluster_max_point = data.cluster_row.max_point;
                summary.cluster_centroid = Some(data.centroid);
                summary.cluster_area_km2 = data.cluster_row.area_km2;
                rows.extend(data.rows);
                rows.push(data.cluster_row);
                daily_masks.push((day.day_id.clone(), data.cluster_mask));
                cluster_grids.push((day.day_id.clone(), write_ascii_grid(&data.cluster_grid)));
            }
            DayOutcome::NoCluster { mask_pixels } => {
                summary.mask_pixels = mask_pixels;
                summary.note = Some("no precipitation cluster on this day".into());
            }
            DayOutcome::Failed(msg) => {
                summary.note = Some(format!("failed: {msg}"));
                failures.push((day.day_id.clone(), msg));
            }
        }
        per_day.push(summary);
    }

    // union footprint over the extracted daily cluster masks
    let (footprint_grid, total_km2, per_zone_km2) = if daily_masks.is_empty() {
        (None, 0.0, Vec::new())
    } else {
        let footprint =
            union_footprint(&daily_masks).map_err(|e| CliError::Processing(e.to_string()))?;
        let zone_map = ctx
            .zone_map_for(footprint.mask().georef())
            .map_err(|e| CliError::Processing(e.to_string()))?;
        let areas = footprint_area(&footprint, &zone_map, &ctx.model)
            .map_err(|e| CliError::Processing(e.to_string()))?;
        let grid_text = write_ascii_grid(&footprint_to_grid(footprint.mask()));
        (Some(grid_text), areas.total_km2, areas.per_zone_km2)
    };

    let zone_names: Vec<String> = ctx
        .boundaries
        .zones()
        .iter()
        .map(|z| z.name.clone())
        .collect();
    let summary = RunSummary {
        mean_of_daily_means_mm: mean_of_daily_means(&rows, &zone_names),
        pooled_mean_mm: pooled_means(&rows, &zone_names),
        total_footprint_km2: total_km2,
        per_zone_footprint_km2: per_zone_km2.into_iter().collect(),
        area_mode: match ctx.model.mode {
            AreaMode::Spherical => "spherical".into(),
            AreaMode::Flat => "flat".into(),
        },
        per_day,
        config: tcrain_core::report::sorted_config_echo(raw_config),
    };

    let charts = build_charts(&summary, &zone_names, &rows)?;
    Ok(RunOutputs {
        csv: write_stats_csv(&rows),
        summary: write_summary_json(&summary),
        footprint_grid,
        cluster_grids,
        charts,
        failures,
    })
}

/// Footprint bits as a 0/1 grid for serialization.
fn footprint_to_grid(mask: &BinaryMask) -> GridF64 {
    let values = mask
        .bits()
        .iter()
        .map(|&b| if b { 1.0 } else { 0.0 })
        .collect();
    Grid::new(mask.georef(), -9999.0, values)
        .expect("footprint dimensions are valid")
        .with_precision(1)
}

fn mean_of_values(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Headline estimator: average the per-day simple means over the days where
/// the zone saw significant rain.
fn mean_of_daily_means(rows: &[ZoneStats], zone_names: &[String]) -> MeanBlock {
    let collect = |zone: &str| -> Vec<f64> {
        rows.iter()
            .filter(|r| r.zone == zone)
            .filter_map(|r| r.mean_mm)
            .collect()
    };
    MeanBlock {
        cluster: mean_of_values(&collect(CLUSTER_ZONE)),
        zones: zone_names
            .iter()
            .map(|z| (z.clone(), mean_of_values(&collect(z))))
            .collect(),
    }
}

/// Alternative estimator: pool every significant day-pixel across the run.
fn pooled_means(rows: &[ZoneStats], zone_names: &[String]) -> MeanBlock {
    let pool = |zone: &str| -> Option<f64> {
        let mut weighted = 0.0;
        let mut count = 0usize;
        for r in rows.iter().filter(|r| r.zone == zone) {
            if let Some(mean) = r.mean_mm {
                weighted += mean * r.significant_pixels as f64;
                count += r.significant_pixels;
            }
        }
        (count > 0).then(|| weighted / count as f64)
    };
    MeanBlock {
        cluster: pool(CLUSTER_ZONE),
        zones: zone_names.iter().map(|z| (z.clone(), pool(z))).collect(),
    }
}

fn build_charts(
    summary: &RunSummary,
    zone_names: &[String],
    rows: &[ZoneStats],
) -> CliResult<Vec<(String, String)>> {
    let chart = |name: &str, series: &[(String, f64)], title: &str, y: &str| {
        render_bar_chart_svg(series, title, y)
            .map(|svg| (format!("{name}.svg"), svg))
            .map_err(|e| CliError::Processing(format!("chart {name}: {e}")))
    };
    let day_series = |value: &dyn Fn(&DaySummary) -> f64| -> Vec<(String, f64)> {
        summary
            .per_day
            .iter()
            .map(|d| (d.day_id.clone(), value(d)))
            .collect()
    };

    let mut charts = Vec::new();
    if summary.per_day.is_empty() {
        return Ok(charts);
    }
    charts.push(chart(
        "pixel_count_mask",
        &day_series(&|d| d.mask_pixels as f64),
        "Mask pixel count per day",
        "pixels",
    )?);
    charts.push(chart(
        "pixel_count_cluster",
        &day_series(&|d| d.cluster_pixels as f64),
        "Extracted cluster pixel count per day",
        "pixels",
    )?);
    charts.push(chart(
        "daily_mean_cluster",
        &day_series(&|d| d.cluster_mean_mm.unwrap_or(0.0)),
        "Cluster mean rainfall per day",
        "mm per 24 h",
    )?);
    charts.push(chart(
        "daily_area_cluster",
        &day_series(&|d| d.cluster_area_km2),
        "Cluster area per day",
        "km^2",
    )?);

    for zone in zone_names {
        let series: Vec<(String, f64)> = summary
            .per_day
            .iter()
            .map(|d| {
                let mean = rows
                    .iter()
                    .find(|r| r.day_id == d.day_id && &r.zone == zone)
                    .and_then(|r| r.mean_mm)
                    .unwrap_or(0.0);
                (d.day_id.clone(), mean)
            })
            .collect();
        charts.push(chart(
            &format!("daily_mean_zone_{}", slug(zone)),
            &series,
            &format!("Mean rainfall per day: {zone}"),
            "mm per 24 h",
        )?);
    }

    if !summary.per_zone_footprint_km2.is_empty() {
        let mut series: Vec<(String, f64)> = vec![("total".into(), summary.total_footprint_km2)];
        series.extend(
            summary
                .per_zone_footprint_km2
                .iter()
                .map(|(z, a)| (z.clone(), *a)),
        );
        charts.push(chart(
            "footprint_area_by_zone",
            &series,
            "Footprint area, total and per zone",
            "km^2",
        )?);
    }
    Ok(charts)
}

fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

/// Write the assembled outputs under `out_dir`.
pub fn write_outputs(out_dir: &Path, outputs: &RunOutputs) -> CliResult<Vec<PathBuf>> {
    let write = |path: PathBuf, text: &str| -> CliResult<PathBuf> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Processing(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, text)
            .map_err(|e| CliError::Processing(format!("{}: {e}", path.display())))?;
        Ok(path)
    };

    let mut written = Vec::new();
    written.push(write(out_dir.join("stats.csv"), &outputs.csv)?);
    written.push(write(out_dir.join("summary.json"), &outputs.summary)?);
    if let Some(fp) = &outputs.footprint_grid {
        written.push(write(out_dir.join("footprint.asc"), fp)?);
    }
    for (day_id, text) in &outputs.cluster_grids {
        written.push(write(
            out_dir.join("clusters").join(format!("{day_id}.asc")),
            text,
        )?);
    }
    for (name, svg) in &outputs.charts {
        written.push(write(out_dir.join("charts").join(name), svg)?);
    }
    Ok(written)
}
