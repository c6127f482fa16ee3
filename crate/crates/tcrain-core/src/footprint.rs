//! Multi-day union footprint of daily cluster masks and its area accounting.

use crate::area::{cell_area, AreaModel};
use crate::error::{Error, Result};
use crate::grid::BinaryMask;
use crate::zonal::ZoneMap;

/// Union of daily cluster masks with the contributing day ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Footprint {
    mask: BinaryMask,
    day_ids: Vec<String>,
}

impl Footprint {
    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn day_ids(&self) -> &[String] {
        &self.day_ids
    }
}

/// Per-cell logical OR over `(day_id, mask)` pairs sharing one georeference.
pub fn union_footprint(daily: &[(String, BinaryMask)]) -> Result<Footprint> {
    let Some((_, first)) = daily.first() else {
        return Err(Error::EmptyInput);
    };
    let georef = first.georef();
    let mut bits = vec![false; georef.len()];
    let mut day_ids = Vec::with_capacity(daily.len());
    for (day_id, mask) in daily {
        georef.require_same(&mask.georef(), &format!("mask '{day_id}'"))?;
        for (b, &m) in bits.iter_mut().zip(mask.bits()) {
            *b |= m;
        }
        day_ids.push(day_id.clone());
    }
    Ok(Footprint {
        mask: BinaryMask::new(georef, bits)?,
        day_ids,
    })
}

/// Footprint areas: the overall total and the per-zone split.
#[derive(Debug, Clone, PartialEq)]
pub struct FootprintArea {
    pub total_km2: f64,
    /// Zone order of the zone map; cells outside every zone count toward the
    /// total only.
    pub per_zone_km2: Vec<(String, f64)>,
}

/// Sum cell areas over the footprint, overall and grouped by zone.
pub fn footprint_area(
    footprint: &Footprint,
    zone_map: &ZoneMap,
    model: &AreaModel,
) -> Result<FootprintArea> {
    footprint
        .mask()
        .georef()
        .require_same(&zone_map.georef(), "footprint vs zone map")
        .map_err(|e| Error::ShapeMismatch(e.to_string()))?;

    let georef = footprint.mask().georef();
    let mut total = 0.0;
    let mut per_zone = vec![0.0; zone_map.zone_names().len()];
    for (row, col) in footprint.mask().iter_true() {
        let (lat, _) = georef.cell_center_unchecked(row, col);
        let area = cell_area(lat, georef.cellsize, model)?;
        total += area;
        let zi = zone_map.zone_index(row, col);
        if zi >= 0 {
            per_zone[zi as usize] += area;
        }
    }
    Ok(FootprintArea {
        total_km2: total,
        per_zone_km2: zone_map
            .zone_names()
            .iter()
            .cloned()
            .zip(per_zone)
            .collect(),
    })
}
