//! Named administrative zones as polygons with holes, read from GeoJSON.

use serde_json::Value;
use std::collections::HashSet;

use crate::error::{Error, Result};

/// Closed ring of `(lon, lat)` vertices; first vertex equals the last.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    vertices: Vec<(f64, f64)>,
}

impl Ring {
    pub fn new(vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.len() < 4 {
            return Err(Error::GeoJson(format!(
                "ring needs at least 4 vertices, found {}",
                vertices.len()
            )));
        }
        if vertices.first() != vertices.last() {
            return Err(Error::GeoJson("unclosed ring".into()));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    /// Consecutive vertex pairs, excluding the closing duplicate's self-edge.
    pub fn edges(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Single polygon: outer ring first, holes after.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub rings: Vec<Ring>,
}

/// Named zone; multiple polygons when the source geometry was a MultiPolygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub name: String,
    pub polygons: Vec<Polygon>,
}

impl Zone {
    /// Even-odd containment over every ring of every polygon. Boundary points
    /// follow the half-open edge rule: an edge counts iff exactly one endpoint
    /// lies strictly above the horizontal ray.
    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        let mut inside = false;
        for polygon in &self.polygons {
            for ring in &polygon.rings {
                for ((x1, y1), (x2, y2)) in ring.edges() {
                    if (y1 > lat) != (y2 > lat) {
                        let x_cross = x1 + (lat - y1) * (x2 - x1) / (y2 - y1);
                        if lon < x_cross {
                            inside = !inside;
                        }
                    }
                }
            }
        }
        inside
    }

    /// `(west, east, south, north)` envelope over all rings.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let mut bbox = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for polygon in &self.polygons {
            for ring in &polygon.rings {
                for &(lon, lat) in ring.vertices() {
                    bbox.0 = bbox.0.min(lon);
                    bbox.1 = bbox.1.max(lon);
                    bbox.2 = bbox.2.min(lat);
                    bbox.3 = bbox.3.max(lat);
                }
            }
        }
        bbox
    }
}

/// Ordered collection of uniquely named zones.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonSet {
    zones: Vec<Zone>,
}

impl PolygonSet {
    pub fn new(zones: Vec<Zone>) -> Result<Self> {
        let mut seen = HashSet::new();
        for zone in &zones {
            if !seen.insert(zone.name.as_str()) {
                return Err(Error::GeoJson(format!(
                    "duplicate zone name '{}'",
                    zone.name
                )));
            }
            if zone.polygons.is_empty() || zone.polygons.iter().any(|p| p.rings.is_empty()) {
                return Err(Error::GeoJson(format!("zone '{}' has no rings", zone.name)));
            }
        }
        Ok(Self { zones })
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }
}

/// Read a GeoJSON FeatureCollection of named Polygon / MultiPolygon features.
pub fn read_geojson_polygons(input: &str) -> Result<PolygonSet> {
    let doc: Value =
        serde_json::from_str(input).map_err(|e| Error::GeoJson(format!("invalid JSON: {e}")))?;
    if doc["type"] != "FeatureCollection" {
        return Err(Error::GeoJson("expected a FeatureCollection".into()));
    }
    let features = doc["features"]
        .as_array()
        .ok_or_else(|| Error::GeoJson("missing 'features' array".into()))?;

    let mut zones = Vec::with_capacity(features.len());
    for (i, feature) in features.iter().enumerate() {
        let name = feature["properties"]["name"]
            .as_str()
            .ok_or_else(|| Error::GeoJson(format!("feature {i}: missing name property")))?
            .to_string();
        let geometry = &feature["geometry"];
        let kind = geometry["type"]
            .as_str()
            .ok_or_else(|| Error::GeoJson(format!("feature '{name}': missing geometry type")))?;
        let coords = &geometry["coordinates"];
        let polygons = match kind {
            "Polygon" => vec![parse_polygon(coords, &name)?],
            "MultiPolygon" => coords
                .as_array()
                .ok_or_else(|| bad_coords(&name))?
                .iter()
                .map(|p| parse_polygon(p, &name))
                .collect::<Result<Vec<_>>>()?,
            other => {
                return Err(Error::GeoJson(format!(
                    "feature '{name}': unsupported geometry type '{other}'"
                )))
            }
        };
        zones.push(Zone { name, polygons });
    }
    PolygonSet::new(zones)
}

fn parse_polygon(coords: &Value, name: &str) -> Result<Polygon> {
    let rings = coords
        .as_array()
        .ok_or_else(|| bad_coords(name))?
        .iter()
        .map(|ring| parse_ring(ring, name))
        .collect::<Result<Vec<_>>>()?;
    if rings.is_empty() {
        return Err(Error::GeoJson(format!(
            "feature '{name}': polygon without rings"
        )));
    }
    Ok(Polygon { rings })
}

fn parse_ring(ring: &Value, name: &str) -> Result<Ring> {
    let vertices = ring
        .as_array()
        .ok_or_else(|| bad_coords(name))?
        .iter()
        .map(|pos| {
            let pos = pos.as_array().ok_or_else(|| bad_coords(name))?;
            let lon = pos
                .first()
                .and_then(Value::as_f64)
                .ok_or_else(|| bad_coords(name))?;
            let lat = pos
                .get(1)
                .and_then(Value::as_f64)
                .ok_or_else(|| bad_coords(name))?;
            Ok((lon, lat))
        })
        .collect::<Result<Vec<_>>>()?;
    Ring::new(vertices).map_err(|e| Error::GeoJson(format!("feature '{name}': {e}")))
}

fn bad_coords(name: &str) -> Error {
    Error::GeoJson(format!("feature '{name}': malformed coordinates"))
}
