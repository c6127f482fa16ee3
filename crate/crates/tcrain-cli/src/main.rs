//! `tcrain`: extract tropical-cyclone precipitation clusters from daily
//! rainfall grids and report rainfall, area and footprint statistics.

// validators use `!(x > 0.0)` so that NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod fetch;
mod pipeline;
mod scenario;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use tcrain_core::{
    accumulate_daily, assign_zones, footprint_area, read_ascii_grid, union_footprint,
    write_ascii_grid, write_stats_csv, zonal_stats, AreaMode, AreaModel, BinaryMask, Connectivity,
    GridF64,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::pipeline::{PipelineOptions, RunOutputs};

#[derive(Parser)]
#[command(
    name = "tcrain",
    version,
    about = "Cyclone precipitation clusters and statistics from rainfall grids"
)]
struct Cli {
    /// Run configuration (JSON); required by run, extract, stats, footprint.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Cell-area rule for area totals.
    #[arg(long, global = true, default_value = "spherical")]
    area_mode: AreaMode,

    /// Pixel adjacency for component labeling: 4 or 8.
    #[arg(long, global = true, default_value = "4")]
    connectivity: Connectivity,

    /// Worker threads for per-day processing; 0 picks the machine default.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Directory for generated files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline over every configured day.
    Run,
    /// Download every URL in a manifest file (one per line).
    Fetch {
        #[arg(long)]
        manifest: PathBuf,
        /// Destination directory.
        #[arg(long)]
        dest: PathBuf,
        /// Bearer token for authenticated servers.
        #[arg(long)]
        token: Option<String>,
    },
    /// Generate a synthetic scenario: grids, track, zones, config, ground truth.
    Synth {
        /// Number of days.
        #[arg(long, default_value_t = 3)]
        days: usize,
        /// Grid edge length in cells.
        #[arg(long, default_value_t = 80)]
        size: usize,
        /// Cell size in degrees.
        #[arg(long, default_value_t = 0.1)]
        cellsize: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Omit the far-field distractor blob.
        #[arg(long)]
        no_distractor: bool,
    },
    /// Sum rate grids (mm/hr) into one accumulation grid (mm).
    Accumulate {
        /// Hours represented by each input grid.
        #[arg(long, default_value_t = 0.5)]
        step_hours: f64,
        /// Output grid path.
        #[arg(long)]
        output: PathBuf,
        /// Input rate grids, in time order.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Extract a single day's cluster grid.
    Extract {
        /// day_id from the config.
        #[arg(long)]
        day: String,
    },
    /// Zonal statistics of one extracted cluster grid, as CSV on stdout.
    Stats {
        /// Extracted cluster grid.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        day_id: Option<String>,
        #[arg(long)]
        date: Option<NaiveDate>,
    },
    /// Union footprint and per-zone areas of extracted cluster grids.
    Footprint {
        /// Extracted cluster grids (valid cells mark the footprint).
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let options = PipelineOptions {
        area_mode: cli.area_mode,
        connectivity: cli.connectivity,
        threads: cli.threads,
    };
    match cli.command {
        Command::Run => cmd_run(cli.config.as_deref(), &cli.out_dir, &options),
        Command::Fetch {
            manifest,
            dest,
            token,
        } => fetch::run_fetch(&manifest, token.as_deref(), &dest),
        Command::Synth {
            days,
            size,
            cellsize,
            seed,
            no_distractor,
        } => {
            let params = scenario::ScenarioParams {
                days,
                size,
                cellsize_deg: cellsize,
                seed,
                distractor: !no_distractor,
            };
            let files = scenario::generate_scenario(&params, &cli.out_dir)?;
            for f in files {
                println!("wrote {}", cli.out_dir.join(f).display());
            }
            Ok(())
        }
        Command::Accumulate {
            step_hours,
            output,
            inputs,
        } => cmd_accumulate(step_hours, &output, &inputs),
        Command::Extract { day } => {
            cmd_extract(cli.config.as_deref(), &cli.out_dir, &day, &options)
        }
        Command::Stats { grid, day_id, date } => cmd_stats(
            cli.config.as_deref(),
            &grid,
            day_id.as_deref(),
            date,
            &options,
        ),
        Command::Footprint { inputs } => {
            cmd_footprint(cli.config.as_deref(), &cli.out_dir, &inputs, &options)
        }
    }
}

fn require_config(config: Option<&Path>) -> CliResult<(RunConfig, serde_json::Value)> {
    let path =
        config.ok_or_else(|| CliError::Config("this subcommand needs --config <path>".into()))?;
    RunConfig::load(path)
}

fn cmd_run(config: Option<&Path>, out_dir: &Path, options: &PipelineOptions) -> CliResult<()> {
    let (config, raw) = require_config(config)?;
    let outputs = pipeline::run_pipeline(&config, &raw, options)?;
    let written = pipeline::write_outputs(out_dir, &outputs)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    report_failures(&outputs)
}

fn report_failures(outputs: &RunOutputs) -> CliResult<()> {
    if outputs.failures.is_empty() {
        return Ok(());
    }
    for (day_id, msg) in &outputs.failures {
        eprintln!("day {day_id} failed: {msg}");
    }
    Err(CliError::Processing(format!(
        "{} day(s) failed; see diagnostics above",
        outputs.failures.len()
    )))
}

fn cmd_accumulate(step_hours: f64, output: &Path, inputs: &[PathBuf]) -> CliResult<()> {
    let grids: Vec<GridF64> = inputs
        .iter()
        .map(|p| read_grid(p))
        .collect::<CliResult<_>>()?;
    let total =
        accumulate_daily(&grids, step_hours).map_err(|e| CliError::Processing(e.to_string()))?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Processing(format!("{}: {e}", parent.display())))?;
    }
    fs::write(output, write_ascii_grid(&total))
        .map_err(|e| CliError::Processing(format!("{}: {e}", output.display())))?;
    println!("wrote {}", output.display());
    Ok(())
}

fn cmd_extract(
    config: Option<&Path>,
    out_dir: &Path,
    day_id: &str,
    options: &PipelineOptions,
) -> CliResult<()> {
    let (config, _raw) = require_config(config)?;
    let day = config
        .days
        .iter()
        .find(|d| d.day_id == day_id)
        .ok_or_else(|| CliError::Config(format!("day '{day_id}' not in the config")))?;

    let track_text = fs::read_to_string(&config.track_path).map_err(|e| {
        CliError::Config(format!("track file {}: {e}", config.track_path.display()))
    })?;
    let track = tcrain_core::read_track_csv(&track_text)
        .map_err(|e| CliError::Config(format!("track: {e}")))?;
    let boundaries_text = fs::read_to_string(&config.boundaries_path).map_err(|e| {
        CliError::Config(format!(
            "boundaries file {}: {e}",
            config.boundaries_path.display()
        ))
    })?;
    let boundaries = tcrain_core::read_geojson_polygons(&boundaries_text)
        .map_err(|e| CliError::Config(format!("boundaries: {e}")))?;
    let model = AreaModel {
        sphere_radius_km: config.sphere_radius_km,
        mode: options.area_mode,
    };

    match pipeline::process_day(
        &config,
        day,
        &track,
        |georef| assign_zones(georef, &boundaries).map(std::sync::Arc::new),
        options,
        &model,
    ) {
        pipeline::DayOutcome::Extracted(data) => {
            let dir = out_dir.join("clusters");
            fs::create_dir_all(&dir)
                .map_err(|e| CliError::Processing(format!("{}: {e}", dir.display())))?;
            let path = dir.join(format!("{day_id}.asc"));
            fs::write(&path, write_ascii_grid(&data.cluster_grid))
                .map_err(|e| CliError::Processing(format!("{}: {e}", path.display())))?;
            println!(
                "{}",
                serde_json::json!({
                    "day_id": day_id,
                    "mask_pixels": data.mask_pixels,
                    "cluster_pixels": data.cluster_pixels,
                    "cluster_mean_mm": data.cluster_row.mean_mm,
                    "centroid": [data.centroid.0, data.centroid.1],
                    "grid": path.display().to_string(),
                })
            );
            Ok(())
        }
        pipeline::DayOutcome::NoCluster { mask_pixels } => {
            println!(
                "{}",
                serde_json::json!({
                    "day_id": day_id,
                    "mask_pixels": mask_pixels,
                    "note": "no precipitation cluster on this day",
                })
            );
            Ok(())
        }
        pipeline::DayOutcome::Failed(msg) => {
            Err(CliError::Processing(format!("day {day_id}: {msg}")))
        }
    }
}

fn cmd_stats(
    config: Option<&Path>,
    grid_path: &Path,
    day_id: Option<&str>,
    date: Option<NaiveDate>,
    options: &PipelineOptions,
) -> CliResult<()> {
    let (config, _raw) = require_config(config)?;
    let boundaries_text = fs::read_to_string(&config.boundaries_path).map_err(|e| {
        CliError::Config(format!(
            "boundaries file {}: {e}",
            config.boundaries_path.display()
        ))
    })?;
    let boundaries = tcrain_core::read_geojson_polygons(&boundaries_text)
        .map_err(|e| CliError::Config(format!("boundaries: {e}")))?;
    let grid = read_grid(grid_path)?;
    let zone_map = assign_zones(grid.georef(), &boundaries)
        .map_err(|e| CliError::Processing(e.to_string()))?;
    let model = AreaModel {
        sphere_radius_km: config.sphere_radius_km,
        mode: options.area_mode,
    };
    let rows: Vec<_> = zonal_stats(&grid, &zone_map, config.trace_mm, &model)
        .map_err(|e| CliError::Processing(e.to_string()))?
        .into_iter()
        .map(|mut r| {
            if let Some(id) = day_id {
                r.day_id = id.to_string();
            }
            r.date = date;
            r
        })
        .collect();
    print!("{}", write_stats_csv(&rows));
    Ok(())
}

fn cmd_footprint(
    config: Option<&Path>,
    out_dir: &Path,
    inputs: &[PathBuf],
    options: &PipelineOptions,
) -> CliResult<()> {
    let (config, _raw) = require_config(config)?;
    let boundaries_text = fs::read_to_string(&config.boundaries_path).map_err(|e| {
        CliError::Config(format!(
            "boundaries file {}: {e}",
            config.boundaries_path.display()
        ))
    })?;
    let boundaries = tcrain_core::read_geojson_polygons(&boundaries_text)
        .map_err(|e| CliError::Config(format!("boundaries: {e}")))?;

    let mut daily: Vec<(String, BinaryMask)> = Vec::with_capacity(inputs.len());
    for path in inputs {
        let grid = read_grid(path)?;
        let bits = grid.values().iter().map(|&v| v != grid.nodata()).collect();
        let mask = BinaryMask::new(grid.georef(), bits)
            .map_err(|e| CliError::Processing(e.to_string()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        daily.push((name, mask));
    }
    let footprint = union_footprint(&daily).map_err(|e| CliError::Processing(e.to_string()))?;
    let zone_map = assign_zones(footprint.mask().georef(), &boundaries)
        .map_err(|e| CliError::Processing(e.to_string()))?;
    let model = AreaModel {
        sphere_radius_km: config.sphere_radius_km,
        mode: options.area_mode,
    };
    let areas = footprint_area(&footprint, &zone_map, &model)
        .map_err(|e| CliError::Processing(e.to_string()))?;

    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Processing(format!("{}: {e}", out_dir.display())))?;
    let path = out_dir.join("footprint.asc");
    let grid = {
        let values = footprint
            .mask()
            .bits()
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect();
        tcrain_core::Grid::new(footprint.mask().georef(), -9999.0, values)
            .map_err(|e| CliError::Processing(e.to_string()))?
            .with_precision(1)
    };
    fs::write(&path, write_ascii_grid(&grid))
        .map_err(|e| CliError::Processing(format!("{}: {e}", path.display())))?;

    println!(
        "{}",
        serde_json::json!({
            "total_km2": areas.total_km2,
            "per_zone_km2": areas
                .per_zone_km2
                .iter()
                .map(|(z, a)| (z.clone(), *a))
                .collect::<std::collections::BTreeMap<String, f64>>(),
            "days": footprint.day_ids(),
            "grid": path.display().to_string(),
        })
    );
    Ok(())
}

fn read_grid(path: &Path) -> CliResult<GridF64> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Config(format!("grid {}: {e}", path.display())))?;
    read_ascii_grid(std::io::BufReader::new(file))
        .map_err(|e| CliError::Config(format!("grid {}: {e}", path.display())))
}
