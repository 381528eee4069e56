//! ESRI ASCII grid (`.asc`) reader and writer.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{GeoRef, Grid};
use crate::error::{Error, Result};

const KEYS: [&str; 6] = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"];

/// Formats a value with at most 9 significant digits, using the shortest
/// text that parses back to the rounded value.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if (1e-5..1e15).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub fn read_ascii_grid(path: impl AsRef<Path>) -> Result<Grid> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ascii_grid(&text).map_err(|e| e.with_path(path))
}

pub fn parse_ascii_grid(text: &str) -> Result<Grid> {
    let mut header: [Option<f64>; 6] = [None; 6];
    let mut lines = text.lines().enumerate().peekable();

    while let Some(&(lineno, line)) = lines.peek() {
        let mut tokens = line.split_whitespace();
        let Some(key) = tokens.next() else {
            lines.next();
            continue;
        };
        if !key.starts_with(|c: char| c.is_ascii_alphabetic()) {
            break;
        }
        let lower = key.to_ascii_lowercase();
        let slot = KEYS
            .iter()
            .position(|k| *k == lower)
            .ok_or_else(|| Error::parse(lineno + 1, 1, format!("malformed header key `{key}`")))?;
        if header[slot].is_some() {
            return Err(Error::parse(lineno + 1, 1, format!("duplicate header key `{key}`")));
        }
        let value = tokens
            .next()
            .ok_or_else(|| Error::parse(lineno + 1, 2, format!("header key `{key}` has no value")))?;
        let parsed: f64 = value
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::parse(lineno + 1, 2, format!("non-numeric header value `{value}`")))?;
        if tokens.next().is_some() {
            return Err(Error::parse(
                lineno + 1,
                3,
                format!("trailing token after header key `{key}`"),
            ));
        }
        header[slot] = Some(parsed);
        lines.next();
    }

    let header_line = lines.peek().map(|&(n, _)| n + 1).unwrap_or(1);
    let need = |slot: usize| {
        header[slot].ok_or_else(|| Error::parse(header_line, 0, format!("missing header key `{}`", KEYS[slot])))
    };
    let count = |slot: usize| -> Result<usize> {
        let v = need(slot)?;
        if v < 1.0 || v.fract() != 0.0 {
            return Err(Error::parse(
                header_line,
                0,
                format!("`{}` must be a positive integer, got {v}", KEYS[slot]),
            ));
        }
        Ok(v as usize)
    };
    let width = count(0)?;
    let height = count(1)?;
    let geo = GeoRef {
        width,
        height,
        origin_x: need(2)?,
        origin_y: need(3)?,
        cell_size: need(4)?,
    };
    geo.validate()
        .map_err(|e| Error::parse(header_line, 0, e.to_string()))?;
    let nodata = header[5].unwrap_or(super::DEFAULT_NODATA);

    let mut values = vec![0.0; width * height];
    let mut data_row = 0usize;
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if data_row == height {
            return Err(Error::parse(
                lineno + 1,
                0,
                format!("extra data row; header declares nrows = {height}"),
            ));
        }
        // file rows run north to south, storage runs south to north
        let row = height - 1 - data_row;
        let mut n = 0usize;
        for (col, token) in line.split_whitespace().enumerate() {
            if col >= width {
                return Err(Error::parse(
                    lineno + 1,
                    col + 1,
                    format!("row {}: expected {width} values, found more", data_row + 1),
                ));
            }
            let v: f64 = token
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::parse(lineno + 1, col + 1, format!("non-numeric value `{token}`")))?;
            values[row * width + col] = v;
            n += 1;
        }
        if n != width {
            return Err(Error::parse(
                lineno + 1,
                n + 1,
                format!("row {}: expected {width} values, found {n}", data_row + 1),
            ));
        }
        data_row += 1;
    }
    if data_row != height {
        return Err(Error::parse(
            text.lines().count() + 1,
            0,
            format!("row {}: expected {height} data rows, found {data_row}", data_row + 1),
        ));
    }

    Grid::new(geo, nodata, values).map_err(|e| Error::parse(header_line, 0, e.to_string()))
}

pub fn write_ascii_grid_to<W: Write>(grid: &Grid, mut out: W) -> std::io::Result<()> {
    let geo = grid.geo();
    writeln!(out, "ncols {}", geo.width)?;
    writeln!(out, "nrows {}", geo.height)?;
    writeln!(out, "xllcorner {}", format_value(geo.origin_x))?;
    writeln!(out, "yllcorner {}", format_value(geo.origin_y))?;
    writeln!(out, "cellsize {}", format_value(geo.cell_size))?;
    writeln!(out, "nodata_value {}", format_value(grid.nodata()))?;
    let mut line = String::new();
    for row in (0..geo.height).rev() {
        line.clear();
        for col in 0..geo.width {
            if col > 0 {
                line.push(' ');
            }
            line.push_str(&format_value(grid.get(col, row)));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn write_ascii_grid(grid: &Grid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_ascii_grid_to(grid, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}
