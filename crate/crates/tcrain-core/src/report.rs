//! Machine-readable report emission: the per-day/per-zone CSV table and the
//! run summary JSON. All floats are serialized at 6 significant digits.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::sigfig::{format_sig, quantize_sig};
use crate::zonal::ZoneStats;

pub const STATS_CSV_HEADER: &str =
    "day_id,date,zone,mean_mm,max_mm,max_lat,max_lon,significant_pixels,area_km2";

const REPORT_SIG_DIGITS: u32 = 6;

/// Serialize stats rows as CSV, sorted by `(date, zone)`. Absent means and
/// maxima become empty fields.
pub fn write_stats_csv(rows: &[ZoneStats]) -> String {
    let mut sorted: Vec<&ZoneStats> = rows.iter().collect();
    sorted.sort_by(|a, b| (a.date, &a.zone).cmp(&(b.date, &b.zone)));

    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(STATS_CSV_HEADER);
    out.push('\n');
    for row in sorted {
        let opt = |v: Option<f64>| {
            v.map(|v| format_sig(v, REPORT_SIG_DIGITS))
                .unwrap_or_default()
        };
        out.push_str(&csv_field(&row.day_id));
        out.push(',');
        out.push_str(&row.date.map(|d| d.to_string()).unwrap_or_default());
        out.push(',');
        out.push_str(&csv_field(&row.zone));
        out.push(',');
        out.push_str(&opt(row.mean_mm));
        out.push(',');
        out.push_str(&opt(row.max_mm));
        out.push(',');
        out.push_str(&opt(row.max_point.map(|p| p.0)));
        out.push(',');
        out.push_str(&opt(row.max_point.map(|p| p.1)));
        out.push(',');
        out.push_str(&row.significant_pixels.to_string());
        out.push(',');
        out.push_str(&format_sig(row.area_km2, REPORT_SIG_DIGITS));
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Per-day pixel bookkeeping and headline cluster values for the summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DaySummary {
    pub day_id: String,
    pub date: NaiveDate,
    pub mask_pixels: usize,
    pub cluster_pixels: usize,
    pub cluster_mean_mm: Option<f64>,
    pub cluster_max_mm: Option<f64>,
    pub cluster_max_point: Option<(f64, f64)>,
    pub cluster_centroid: Option<(f64, f64)>,
    pub cluster_area_km2: f64,
    /// Present when the day was skipped (no cluster, missing fix, bad input).
    pub note: Option<String>,
}

/// Rainfall means for the whole cluster and per zone.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct MeanBlock {
    pub cluster: Option<f64>,
    pub zones: BTreeMap<String, Option<f64>>,
}

/// Everything the summary JSON reports about one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    /// Headline estimator: mean over days of each day's simple mean.
    pub mean_of_daily_means_mm: MeanBlock,
    /// Alternative estimator: all significant day-pixels pooled.
    pub pooled_mean_mm: MeanBlock,
    pub total_footprint_km2: f64,
    pub per_zone_footprint_km2: BTreeMap<String, f64>,
    pub area_mode: String,
    pub per_day: Vec<DaySummary>,
    pub config: Value,
}

/// Serialize the run summary as pretty JSON with floats rounded to 6
/// significant digits.
pub fn write_summary_json(summary: &RunSummary) -> String {
    let mut value = serde_json::to_value(summary).expect("summary serializes");
    quantize_numbers(&mut value);
    let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
    out.push('\n');
    out
}

fn quantize_numbers(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    if let Some(q) = Number::from_f64(quantize_sig(f, REPORT_SIG_DIGITS)) {
                        *n = q;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(quantize_numbers),
        Value::Object(map) => map.values_mut().for_each(quantize_numbers),
        _ => {}
    }
}

/// Echoed configuration with deterministic key order.
pub fn sorted_config_echo(config: &Value) -> Value {
    match config {
        Value::Object(map) => {
            let mut sorted = Map::new();
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for k in keys {
                sorted.insert(k.clone(), sorted_config_echo(&map[k]));
            }
            Value::Object(sorted)
        }
        Value::Array(items) => Value::Array(items.iter().map(sorted_config_echo).collect()),
        other => other.clone(),
    }
}
