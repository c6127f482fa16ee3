//! Plain-text grid format: one `KEY value` header line per key, then data
//! rows north to south, whitespace-separated.
//!
//! Header keys (case-insensitive): `NCOLS`, `NROWS`, `XLLCORNER`, `YLLCORNER`,
//! `CELLSIZE`, `NODATA_VALUE`, `PRECISION` (optional, default 6) and `CRS`
//! (optional, `geographic` or `sinusoidal_km`, default geographic).

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::grid::{Crs, GeoRef, Grid, DEFAULT_PRECISION};
use crate::scalar::Scalar;
use crate::sigfig::format_sig;

#[derive(Default)]
struct Header<T> {
    ncols: Option<usize>,
    nrows: Option<usize>,
    xll: Option<f64>,
    yll: Option<f64>,
    cellsize: Option<f64>,
    nodata: Option<T>,
    precision: Option<u32>,
    crs: Option<Crs>,
}

/// Parse a grid from the ASCII format. Errors carry 1-based line numbers.
pub fn read_ascii_grid<T: Scalar, R: BufRead>(reader: R) -> Result<Grid<T>> {
    let mut header = Header::<T>::default();
    let mut values: Vec<T> = Vec::new();
    let mut georef: Option<GeoRef> = None;
    let mut nodata = T::zero();
    let mut rows_seen = 0usize;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let starts_alpha = trimmed
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');

        if georef.is_none() && starts_alpha {
            parse_header_line(&mut header, trimmed, line_no)?;
            continue;
        }

        if georef.is_none() {
            let (g, nd) = finish_header(&header)?;
            values.reserve_exact(g.len());
            georef = Some(g);
            nodata = nd;
        }
        let g = georef.as_ref().expect("header finished");

        let mut count = 0usize;
        for token in trimmed.split_whitespace() {
            let v: T = token.parse().map_err(|_| Error::NonNumericToken {
                token: token.to_string(),
                line: line_no,
            })?;
            values.push(v);
            count += 1;
        }
        if count != g.ncols {
            return Err(Error::RowLengthMismatch { line: line_no });
        }
        rows_seen += 1;
        if rows_seen > g.nrows {
            return Err(Error::ValueCountMismatch {
                expected: g.len(),
                found: values.len(),
            });
        }
    }

    let georef = match georef {
        Some(g) => g,
        // header only (or empty input): report what is missing, else zero data
        None => {
            let (g, _) = finish_header(&header)?;
            return Err(Error::ValueCountMismatch {
                expected: g.len(),
                found: 0,
            });
        }
    };
    if values.len() != georef.len() {
        return Err(Error::ValueCountMismatch {
            expected: georef.len(),
            found: values.len(),
        });
    }
    Ok(Grid::new(georef, nodata, values)?
        .with_precision(header.precision.unwrap_or(DEFAULT_PRECISION)))
}

/// Parse a grid from an in-memory string.
pub fn read_ascii_grid_str<T: Scalar>(text: &str) -> Result<Grid<T>> {
    read_ascii_grid(text.as_bytes())
}

fn parse_header_line<T: Scalar>(header: &mut Header<T>, line: &str, line_no: usize) -> Result<()> {
    let mut parts = line.split_whitespace();
    let key = parts.next().expect("non-empty line");
    let value = parts.next();
    let (Some(value), None) = (value, parts.next()) else {
        return Err(Error::MalformedHeader { line: line_no });
    };

    let numeric = |v: &str| -> Result<f64> {
        v.parse().map_err(|_| Error::NonNumericToken {
            token: v.to_string(),
            line: line_no,
        })
    };
    match key.to_ascii_uppercase().as_str() {
        "NCOLS" => header.ncols = Some(numeric(value)? as usize),
        "NROWS" => header.nrows = Some(numeric(value)? as usize),
        "XLLCORNER" => header.xll = Some(numeric(value)?),
        "YLLCORNER" => header.yll = Some(numeric(value)?),
        "CELLSIZE" => header.cellsize = Some(numeric(value)?),
        "NODATA_VALUE" => {
            header.nodata = Some(value.parse().map_err(|_| Error::NonNumericToken {
                token: value.to_string(),
                line: line_no,
            })?)
        }
        "PRECISION" => header.precision = Some(numeric(value)? as u32),
        "CRS" => {
            header.crs = Some(match value.to_ascii_lowercase().as_str() {
                "geographic" => Crs::Geographic,
                "sinusoidal_km" => Crs::SinusoidalKm,
                other => {
                    return Err(Error::InvalidGrid(format!(
                        "unknown CRS '{other}' at line {line_no}"
                    )))
                }
            })
        }
        other => {
            return Err(Error::UnknownHeaderKey {
                key: other.to_string(),
                line: line_no,
            })
        }
    }
    Ok(())
}

fn finish_header<T: Scalar>(header: &Header<T>) -> Result<(GeoRef, T)> {
    let ncols = header.ncols.ok_or(Error::MissingHeader("NCOLS"))?;
    let nrows = header.nrows.ok_or(Error::MissingHeader("NROWS"))?;
    let xll = header.xll.ok_or(Error::MissingHeader("XLLCORNER"))?;
    let yll = header.yll.ok_or(Error::MissingHeader("YLLCORNER"))?;
    let cellsize = header.cellsize.ok_or(Error::MissingHeader("CELLSIZE"))?;
    let nodata = header.nodata.ok_or(Error::MissingHeader("NODATA_VALUE"))?;
    let georef = GeoRef {
        ncols,
        nrows,
        xll,
        yll,
        cellsize,
        crs: header.crs.unwrap_or_default(),
    };
    georef.validate()?;
    Ok((georef, nodata))
}

/// Serialize a grid to the ASCII format.
///
/// Georeferencing and the nodata sentinel are written losslessly; data cells
/// use the grid's declared significant-digit precision, except nodata cells,
/// which repeat the sentinel literally.
pub fn write_ascii_grid<T: Scalar>(grid: &Grid<T>) -> String {
    let g = grid.georef();
    let nodata_repr = format!("{}", grid.nodata());
    let mut out = String::with_capacity(grid.values().len() * 8 + 128);
    out.push_str(&format!("NCOLS {}\n", g.ncols));
    out.push_str(&format!("NROWS {}\n", g.nrows));
    out.push_str(&format!("XLLCORNER {}\n", g.xll));
    out.push_str(&format!("YLLCORNER {}\n", g.yll));
    out.push_str(&format!("CELLSIZE {}\n", g.cellsize));
    out.push_str(&format!("NODATA_VALUE {nodata_repr}\n"));
    out.push_str(&format!("PRECISION {}\n", grid.precision()));
    if g.crs == Crs::SinusoidalKm {
        out.push_str("CRS sinusoidal_km\n");
    }
    for row in 0..g.nrows {
        for col in 0..g.ncols {
            if col > 0 {
                out.push(' ');
            }
            let v = grid.value(row, col);
            if v == grid.nodata() {
                out.push_str(&nodata_repr);
            } else {
                out.push_str(&format_sig(v.as_f64(), grid.precision()));
            }
        }
        out.push('\n');
    }
    out
}
