//! Cyclone best-track fixes and the CSV reader for them.

use chrono::{DateTime, Duration, NaiveDate, NaiveDateTime, Utc};

use crate::error::{Error, Result};

/// One center fix: timestamp, position and a free-text stage label
/// (e.g. `ESCS`, `D`).
#[derive(Debug, Clone, PartialEq)]
pub struct TrackPoint {
    pub timestamp: DateTime<Utc>,
    pub lat: f64,
    pub lon: f64,
    pub label: String,
}

/// Time-ordered list of center fixes.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    points: Vec<TrackPoint>,
}

impl Track {
    pub fn new(points: Vec<TrackPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyTrack);
        }
        for (i, p) in points.iter().enumerate() {
            validate_point(p, i + 1)?;
            if i > 0 && p.timestamp <= points[i - 1].timestamp {
                return Err(Error::Track {
                    line: i + 1,
                    msg: format!("timestamp {} does not increase", p.timestamp),
                });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[TrackPoint] {
        &self.points
    }

    /// Fix nearest in time to `when`, if within `max_gap`. Ties prefer the
    /// earlier fix.
    pub fn fix_near(&self, when: DateTime<Utc>, max_gap: Duration) -> Option<&TrackPoint> {
        self.points
            .iter()
            .map(|p| {
                let gap = (p.timestamp - when).abs();
                (gap, p)
            })
            .filter(|(gap, _)| *gap <= max_gap)
            .min_by_key(|(gap, p)| (*gap, p.timestamp))
            .map(|(_, p)| p)
    }

    /// The 03 UTC fix for `date`: the fix nearest to `date` 03:00 UTC within
    /// 24 hours.
    pub fn fix_for_date(&self, date: NaiveDate) -> Option<&TrackPoint> {
        let at = date.and_hms_opt(3, 0, 0).expect("03:00 is valid").and_utc();
        self.fix_near(at, Duration::hours(24))
    }
}

fn validate_point(p: &TrackPoint, line: usize) -> Result<()> {
    if !(-90.0..=90.0).contains(&p.lat) {
        return Err(Error::Track {
            line,
            msg: format!("latitude {} outside [-90, 90]", p.lat),
        });
    }
    if !(-180.0..=180.0).contains(&p.lon) {
        return Err(Error::Track {
            line,
            msg: format!("longitude {} outside [-180, 180]", p.lon),
        });
    }
    Ok(())
}

/// Parse a track CSV with header `timestamp,lat,lon,label`.
///
/// Timestamps are RFC 3339 UTC instants; the seconds part may be omitted
/// (`2023-06-15T03:00Z`). Line numbers in errors refer to the file, header
/// included.
pub fn read_track_csv(input: &str) -> Result<Track> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let Some((header_line, header)) = lines.next() else {
        return Err(Error::EmptyTrack);
    };
    let cols: Vec<String> = header
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .collect();
    if cols != ["timestamp", "lat", "lon", "label"] {
        return Err(Error::Track {
            line: header_line,
            msg: format!("expected header 'timestamp,lat,lon,label', found '{header}'"),
        });
    }

    let mut points = Vec::new();
    let mut prev: Option<DateTime<Utc>> = None;
    for (line, row) in lines {
        let fields: Vec<&str> = row.splitn(4, ',').collect();
        if fields.len() != 4 {
            return Err(Error::Track {
                line,
                msg: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let timestamp = parse_utc_timestamp(fields[0].trim()).ok_or_else(|| Error::Track {
            line,
            msg: format!("unparseable timestamp '{}'", fields[0].trim()),
        })?;
        let lat: f64 = fields[1].trim().parse().map_err(|_| Error::Track {
            line,
            msg: format!("unparseable latitude '{}'", fields[1].trim()),
        })?;
        let lon: f64 = fields[2].trim().parse().map_err(|_| Error::Track {
            line,
            msg: format!("unparseable longitude '{}'", fields[2].trim()),
        })?;
        let point = TrackPoint {
            timestamp,
            lat,
            lon,
            label: fields[3].trim().to_string(),
        };
        validate_point(&point, line)?;
        if let Some(prev) = prev {
            if timestamp <= prev {
                return Err(Error::Track {
                    line,
                    msg: format!("timestamp {timestamp} does not increase"),
                });
            }
        }
        prev = Some(timestamp);
        points.push(point);
    }
    if points.is_empty() {
        return Err(Error::EmptyTrack);
    }
    Ok(Track { points })
}

/// RFC 3339 instant, with a minutes-only fallback (`2023-06-15T03:00Z`).
fn parse_utc_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%MZ")
        .ok()
        .map(|t| t.and_utc())
}
