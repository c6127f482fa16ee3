//! Extraction and statistics of tropical-cyclone precipitation clusters from
//! gridded rainfall rasters.
//!
//! The pipeline stages live in the modules below, in processing order:
//!
//! - [`ascii`], [`track`], [`boundaries`], [`daily`]: on-disk formats and
//!   daily accumulation of rate grids
//! - [`project`]: sinusoidal/geographic transforms, reprojection, subsetting
//! - [`cluster`], [`label`]: thresholding, connected-component labeling and
//!   cyclone-cluster selection via the best-track fix
//! - [`area`], [`zonal`], [`footprint`]: cell areas, per-zone rainfall
//!   statistics and the multi-day union footprint
//! - [`synth`]: Gaussian-blob test fields with ownership ground truth
//! - [`report`], [`chart`]: CSV/JSON emission and SVG bar charts
//!
//! Cell values are generic over [`Scalar`] (f32 or f64); coordinates,
//! areas and reported statistics are always f64.

// validators use `!(x > 0.0)` so that NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod area;
pub mod ascii;
pub mod boundaries;
pub mod chart;
pub mod cluster;
pub mod daily;
pub mod error;
pub mod footprint;
pub mod grid;
pub mod label;
pub mod project;
pub mod report;
pub mod scalar;
pub mod sigfig;
pub mod synth;
pub mod track;
pub mod zonal;

pub use area::{cell_area, AreaMode, AreaModel};
pub use ascii::{read_ascii_grid, read_ascii_grid_str, write_ascii_grid};
pub use boundaries::{read_geojson_polygons, PolygonSet, Zone};
pub use cluster::{
    extract_cluster_grid, make_mask, pixel_counts, select_cyclone_cluster, Cluster, MaskConfig,
};
pub use daily::{accumulate_daily, DayEntry, DaySeries};
pub use error::{Error, Result};
pub use footprint::{footprint_area, union_footprint, Footprint, FootprintArea};
pub use grid::{BinaryMask, Crs, GeoRef, Grid, DEFAULT_PRECISION};
pub use label::{label_components, Connectivity, LabeledGrid};
pub use project::{
    haversine_km, reproject_to_geographic, sinu_forward, sinu_inverse, subset, GeoBounds,
    SinusoidalParams, EARTH_RADIUS_KM,
};
pub use report::{
    write_stats_csv, write_summary_json, DaySummary, MeanBlock, RunSummary, STATS_CSV_HEADER,
};
pub use scalar::Scalar;
pub use synth::{analytic_disk_area_deg2, render_field, BlobSpec};
pub use track::{read_track_csv, Track, TrackPoint};
pub use zonal::{assign_zones, cluster_centroid, cluster_mean, zonal_stats, ZoneMap, ZoneStats};

pub use chart::render_bar_chart_svg;

/// Single-precision grid.
pub type GridF32 = Grid<f32>;
/// Double-precision grid, the pipeline default.
pub type GridF64 = Grid<f64>;
