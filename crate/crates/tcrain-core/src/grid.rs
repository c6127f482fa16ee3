//! Raster primitives: georeferencing header, value grid, binary mask.
//!
//! Grids are row-major with row 0 at the north edge. Georeferencing follows
//! the lower-left-corner convention of the on-disk ASCII format.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default significant digits used when serializing cell values.
pub const DEFAULT_PRECISION: u32 = 6;

/// Coordinate reference of a grid's georeferencing header.
///
/// `Geographic` grids carry degrees (lon/lat); `SinusoidalKm` grids carry
/// projected kilometers and exist only as reprojection sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Crs {
    #[default]
    Geographic,
    SinusoidalKm,
}

/// Georeferencing shared by grids, masks and labelings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoRef {
    pub ncols: usize,
    pub nrows: usize,
    /// Horizontal coordinate of the west edge (degrees, or km when projected).
    pub xll: f64,
    /// Vertical coordinate of the south edge (degrees, or km when projected).
    pub yll: f64,
    /// Cell size in the same unit as `xll`/`yll`; cells are square.
    pub cellsize: f64,
    pub crs: Crs,
}

impl GeoRef {
    pub fn geographic(ncols: usize, nrows: usize, xll: f64, yll: f64, cellsize: f64) -> Self {
        Self {
            ncols,
            nrows,
            xll,
            yll,
            cellsize,
            crs: Crs::Geographic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ncols == 0 || self.nrows == 0 {
            return Err(Error::InvalidGrid(
                "ncols and nrows must be positive".into(),
            ));
        }
        if !(self.cellsize > 0.0) || !self.cellsize.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "cellsize must be positive, got {}",
                self.cellsize
            )));
        }
        if !self.xll.is_finite() || !self.yll.is_finite() {
            return Err(Error::InvalidGrid(
                "corner coordinates must be finite".into(),
            ));
        }
        if self.crs == Crs::Geographic {
            if !(-180.0..180.0).contains(&self.xll) {
                return Err(Error::InvalidGrid(format!(
                    "xll {} outside [-180, 180)",
                    self.xll
                )));
            }
            let north = self.yll + self.nrows as f64 * self.cellsize;
            if north > 90.0 + 1e-9 {
                return Err(Error::InvalidGrid(format!(
                    "north edge {north} above 90 degrees"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ncols * self.nrows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.nrows && col < self.ncols);
        row * self.ncols + col
    }

    pub fn west(&self) -> f64 {
        self.xll
    }

    pub fn east(&self) -> f64 {
        self.xll + self.ncols as f64 * self.cellsize
    }

    pub fn south(&self) -> f64 {
        self.yll
    }

    pub fn north(&self) -> f64 {
        self.yll + self.nrows as f64 * self.cellsize
    }

    /// Center of the cell at `(row, col)` as `(lat, lon)` for geographic grids
    /// (or `(y, x)` in km for projected ones). Row 0 is the northernmost row.
    pub fn cell_center(&self, row: usize, col: usize) -> Result<(f64, f64)> {
        if row >= self.nrows || col >= self.ncols {
            return Err(Error::IndexOutOfRange { row, col });
        }
        Ok(self.cell_center_unchecked(row, col))
    }

    #[inline]
    pub(crate) fn cell_center_unchecked(&self, row: usize, col: usize) -> (f64, f64) {
        let lon = self.xll + (col as f64 + 0.5) * self.cellsize;
        let lat = self.yll + (self.nrows as f64 - row as f64 - 0.5) * self.cellsize;
        (lat, lon)
    }

    /// Cell containing the point `(lat, lon)` (or `(y, x)`), if inside the extent.
    pub fn cell_containing(&self, lat: f64, lon: f64) -> Option<(usize, usize)> {
        let col = ((lon - self.xll) / self.cellsize).floor();
        let row_from_south = ((lat - self.yll) / self.cellsize).floor();
        if col < 0.0 || row_from_south < 0.0 {
            return None;
        }
        let (col, row_from_south) = (col as usize, row_from_south as usize);
        if col >= self.ncols || row_from_south >= self.nrows {
            return None;
        }
        Some((self.nrows - 1 - row_from_south, col))
    }

    pub(crate) fn require_geographic(&self) -> Result<()> {
        if self.crs != Crs::Geographic {
            return Err(Error::InvalidArgument(
                "operation requires a geographic (lon/lat) grid".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn require_same(&self, other: &GeoRef, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::GeorefMismatch(format!(
                "{what}: {self:?} vs {other:?}"
            )));
        }
        Ok(())
    }
}

/// Regular 2-D raster of precipitation values with a nodata sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    georef: GeoRef,
    nodata: T,
    precision: u32,
    values: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    /// Build a grid, enforcing the type invariants: value count matches the
    /// header, the header is self-consistent, and every non-nodata value is
    /// finite and non-negative.
    pub fn new(georef: GeoRef, nodata: T, values: Vec<T>) -> Result<Self> {
        georef.validate()?;
        if values.len() != georef.len() {
            return Err(Error::ValueCountMismatch {
                expected: georef.len(),
                found: values.len(),
            });
        }
        if nodata.is_nan() {
            return Err(Error::InvalidGrid("nodata sentinel must not be NaN".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if *v == nodata {
                continue;
            }
            if !v.is_finite() || *v < T::zero() {
                let row = i / georef.ncols;
                let col = i % georef.ncols;
                return Err(Error::InvalidGrid(format!(
                    "value {v} at row {row}, col {col} is negative or non-finite"
                )));
            }
        }
        Ok(Self {
            georef,
            nodata,
            precision: DEFAULT_PRECISION,
            values,
        })
    }

    /// Grid with every cell set to `fill` (commonly the nodata sentinel).
    pub fn filled(georef: GeoRef, nodata: T, fill: T) -> Result<Self> {
        Grid::new(georef, nodata, vec![fill; georef.len()])
    }

    pub fn georef(&self) -> GeoRef {
        self.georef
    }

    pub fn ncols(&self) -> usize {
        self.georef.ncols
    }

    pub fn nrows(&self) -> usize {
        self.georef.nrows
    }

    pub fn nodata(&self) -> T {
        self.nodata
    }

    /// Significant digits used when this grid is serialized.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn with_precision(mut self, precision: u32) -> Self {
        self.precision = precision.clamp(1, 17);
        self
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> T {
        self.values[self.georef.index(row, col)]
    }

    /// Value at `(row, col)`, or `None` when the cell is nodata.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<T> {
        let v = self.value(row, col);
        (v != self.nodata).then_some(v)
    }

    #[inline]
    pub fn is_nodata(&self, row: usize, col: usize) -> bool {
        self.value(row, col) == self.nodata
    }

    /// Overwrite one cell. Callers are responsible for keeping values
    /// non-negative or equal to the nodata sentinel.
    #[inline]
    pub fn set_value(&mut self, row: usize, col: usize, v: T) {
        let i = self.georef.index(row, col);
        self.values[i] = v;
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Row-major iteration over `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let ncols = self.georef.ncols;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (i / ncols, i % ncols, v))
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Result<(f64, f64)> {
        self.georef.cell_center(row, col)
    }
}

/// Thresholded raster: true bits mark retained (rain) cells.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    georef: GeoRef,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(georef: GeoRef, bits: Vec<bool>) -> Result<Self> {
        georef.validate()?;
        if bits.len() != georef.len() {
            return Err(Error::ValueCountMismatch {
                expected: georef.len(),
                found: bits.len(),
            });
        }
        Ok(Self { georef, bits })
    }

    pub fn all_false(georef: GeoRef) -> Result<Self> {
        BinaryMask::new(georef, vec![false; georef.len()])
    }

    pub fn georef(&self) -> GeoRef {
        self.georef
    }

    #[inline]
    pub fn bit(&self, row: usize, col: usize) -> bool {
        self.bits[self.georef.index(row, col)]
    }

    #[inline]
    pub fn set_bit(&mut self, row: usize, col: usize, on: bool) {
        let i = self.georef.index(row, col);
        self.bits[i] = on;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Row-major iteration over the true cells.
    pub fn iter_true(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let ncols = self.georef.ncols;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / ncols, i % ncols))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn georef(ncols: usize, nrows: usize) -> GeoRef {
        GeoRef::geographic(ncols, nrows, 0.0, 0.0, 1.0)
    }

    #[test]
    fn rejects_value_count_mismatch() {
        let err = Grid::new(georef(2, 2), -9999.0, vec![0.0; 3]).unwrap_err();
        assert!(matches!(
            err,
            Error::ValueCountMismatch {
                expected: 4,
                found: 3
            }
        ));
    }

    #[test]
    fn rejects_negative_values() {
        assert!(Grid::new(georef(2, 1), -9999.0, vec![0.0, -1.0]).is_err());
        // the sentinel itself may be negative
        assert!(Grid::new(georef(2, 1), -9999.0, vec![0.0, -9999.0]).is_ok());
    }

    #[test]
    fn rejects_north_edge_above_pole() {
        let g = GeoRef::geographic(2, 2, 0.0, 89.5, 1.0);
        assert!(Grid::new(g, -9999.0, vec![0.0; 4]).is_err());
    }

    #[test]
    fn cell_center_follows_north_up_convention() {
        let g = GeoRef::geographic(1, 1, 0.0, 0.0, 1.0);
        assert_eq!(g.cell_center(0, 0).unwrap(), (0.5, 0.5));

        let g = GeoRef::geographic(400, 400, 60.0, 0.0, 0.1);
        let (lat, lon) = g.cell_center(0, 0).unwrap();
        assert!((lat - 39.95).abs() < 1e-12);
        assert!((lon - 60.05).abs() < 1e-12);

        // row 0 is the northernmost row
        let (top, _) = g.cell_center(0, 0).unwrap();
        let (below, _) = g.cell_center(1, 0).unwrap();
        assert!(top > below);
    }

    #[test]
    fn cell_containing_inverts_cell_center() {
        let g = GeoRef::geographic(7, 5, 10.0, 20.0, 0.5);
        for row in 0..5 {
            for col in 0..7 {
                let (lat, lon) = g.cell_center(row, col).unwrap();
                assert_eq!(g.cell_containing(lat, lon), Some((row, col)));
            }
        }
        assert_eq!(g.cell_containing(19.9, 10.2), None);
        assert_eq!(g.cell_containing(20.1, 13.6), None);
    }

    #[test]
    fn nodata_uses_exact_sentinel_equality() {
        let g = Grid::new(georef(2, 1), -9999.0, vec![-9999.0, 3.0]).unwrap();
        assert!(g.is_nodata(0, 0));
        assert_eq!(g.get(0, 0), None);
        assert_eq!(g.get(0, 1), Some(3.0));
    }

    #[test]
    fn projected_georef_skips_degree_range_checks() {
        let g = GeoRef {
            ncols: 4,
            nrows: 4,
            xll: 5400.0,
            yll: 700.0,
            cellsize: 10.0,
            crs: Crs::SinusoidalKm,
        };
        assert!(g.validate().is_ok());
        assert!(Grid::new(g, -9999.0f32, vec![1.0f32; 16]).is_ok());
    }
}
