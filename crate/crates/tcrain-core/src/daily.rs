//! Day-keyed grid series and accumulation of rate grids into daily totals.

use chrono::NaiveDate;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Scalar;

/// One analysis day: identifier, calendar date and its daily-total grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DayEntry<T> {
    pub day_id: String,
    pub date: NaiveDate,
    pub grid: Grid<T>,
}

/// Ordered series of analysis days with unique ids and increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct DaySeries<T> {
    entries: Vec<DayEntry<T>>,
}

impl<T: Scalar> DaySeries<T> {
    pub fn new(entries: Vec<DayEntry<T>>) -> Result<Self> {
        let mut ids = HashSet::new();
        for (i, e) in entries.iter().enumerate() {
            if !ids.insert(e.day_id.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate day_id '{}'",
                    e.day_id
                )));
            }
            if i > 0 && e.date <= entries[i - 1].date {
                return Err(Error::InvalidArgument(format!(
                    "dates not strictly increasing at '{}'",
                    e.day_id
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[DayEntry<T>] {
        &self.entries
    }

    pub fn get(&self, day_id: &str) -> Option<&DayEntry<T>> {
        self.entries.iter().find(|e| e.day_id == day_id)
    }
}

/// Sum rate grids (mm/hr) into an accumulation grid (mm): per cell,
/// `sum(rate * step_hours)` over the inputs where the cell is valid. A cell
/// is nodata in the output iff it is nodata in every input.
pub fn accumulate_daily<T: Scalar>(rate_grids: &[Grid<T>], step_hours: f64) -> Result<Grid<T>> {
    let Some(first) = rate_grids.first() else {
        return Err(Error::EmptyInput);
    };
    if !(step_hours > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step_hours must be positive, got {step_hours}"
        )));
    }
    for (i, g) in rate_grids.iter().enumerate().skip(1) {
        first
            .georef()
            .require_same(&g.georef(), &format!("input {i}"))?;
        if g.nodata() != first.nodata() {
            return Err(Error::GeorefMismatch(format!(
                "input {i}: nodata sentinel {} differs from {}",
                g.nodata(),
                first.nodata()
            )));
        }
    }

    let step = T::from_f64_lossy(step_hours);
    let nodata = first.nodata();
    let n = first.georef().len();
    let mut sums = vec![T::zero(); n];
    let mut seen = vec![false; n];
    for g in rate_grids {
        for (i, &v) in g.values().iter().enumerate() {
            if v != nodata {
                sums[i] = sums[i] + v * step;
                seen[i] = true;
            }
        }
    }
    let values = sums
        .into_iter()
        .zip(&seen)
        .map(|(s, &ok)| if ok { s } else { nodata })
        .collect();
    Ok(Grid::new(first.georef(), nodata, values)?.with_precision(first.precision()))
}
