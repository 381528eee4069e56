//! Raster data model.
//!
//! Cells are stored row-major with row 0 at the south edge of the extent, so
//! the centre of cell `(col, row)` sits at
//! `(origin_x + (col + 0.5) * cell_size, origin_y + (row + 0.5) * cell_size)`.
//! Rendering and the ASCII grid body both run north to south and flip rows on
//! the way in and out.

mod ascii;
mod render;

pub use ascii::{format_value, parse_ascii_grid, read_ascii_grid, write_ascii_grid, write_ascii_grid_to};
pub use render::{render_categorical, render_grid, Palette, Rgb};

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Nodata sentinel used for every grid the engine creates itself.
pub const DEFAULT_NODATA: f64 = -9999.0;

/// Georeferencing shared by [`Grid`] and [`CategoricalGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoRef {
    pub width: usize,
    pub height: usize,
    /// Lower-left corner of the extent, in metres.
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
}

impl GeoRef {
    pub fn new(width: usize, height: usize, origin_x: f64, origin_y: f64, cell_size: f64) -> Result<Self> {
        let geo = GeoRef {
            width,
            height,
            origin_x,
            origin_y,
            cell_size,
        };
        geo.validate()?;
        Ok(geo)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidGrid(format!(
                "dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "cell size must be positive, got {}",
                self.cell_size
            )));
        }
        if !self.origin_x.is_finite() || !self.origin_y.is_finite() {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    /// `(col, row)` of a linear index.
    #[inline]
    pub fn col_row(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin_x + (col as f64 + 0.5) * self.cell_size,
            self.origin_y + (row as f64 + 0.5) * self.cell_size,
        )
    }

    /// The cell containing `(x, y)`. Cells are half-open: the west and south
    /// edges belong to the cell, the east and north edges to its neighbour.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fx = ((x - self.origin_x) / self.cell_size).floor();
        let fy = ((y - self.origin_y) / self.cell_size).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    pub fn is_aligned(&self, other: &GeoRef) -> bool {
        self == other
    }

    pub fn check_aligned(&self, other: &GeoRef, what: &str) -> Result<()> {
        if self.is_aligned(other) {
            Ok(())
        } else {
            Err(Error::NotAligned(format!("{what}: {self:?} vs {other:?}")))
        }
    }
}

/// Single-band raster of reals with a nodata sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    geo: GeoRef,
    nodata: f64,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(geo: GeoRef, nodata: f64, values: Vec<f64>) -> Result<Self> {
        geo.validate()?;
        if !nodata.is_finite() {
            return Err(Error::InvalidGrid("nodata sentinel must be finite".into()));
        }
        if values.len() != geo.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                geo.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value {v}")));
        }
        Ok(Grid { geo, nodata, values })
    }

    pub fn filled(geo: GeoRef, value: f64) -> Self {
        Grid {
            geo,
            nodata: DEFAULT_NODATA,
            values: vec![value; geo.len()],
        }
    }

    pub fn geo(&self) -> &GeoRef {
        &self.geo
    }

    pub fn width(&self) -> usize {
        self.geo.width
    }

    pub fn height(&self) -> usize {
        self.geo.height
    }

    pub fn cell_size(&self) -> f64 {
        self.geo.cell_size
    }

    pub fn nodata(&self) -> f64 {
        self.nodata
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[self.geo.index(col, row)]
    }

    /// The value at `index`, or `None` for nodata.
    #[inline]
    pub fn valid(&self, index: usize) -> Option<f64> {
        let v = self.values[index];
        (v != self.nodata).then_some(v)
    }

    #[inline]
    pub fn is_nodata(&self, index: usize) -> bool {
        self.values[index] == self.nodata
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != self.nodata).count()
    }

    pub fn is_aligned(&self, other: &Grid) -> bool {
        self.geo.is_aligned(&other.geo)
    }

    /// Cell-wise map over valid cells; nodata stays nodata.
    pub fn map_valid(&self, f: impl Fn(f64) -> f64) -> Grid {
        let values = self
            .values
            .iter()
            .map(|&v| if v == self.nodata { v } else { f(v) })
            .collect();
        Grid {
            geo: self.geo,
            nodata: self.nodata,
            values,
        }
    }

    /// Copies this grid with every cell outside `mask` (mask value not 1) set
    /// to nodata.
    pub fn masked(&self, mask: &Grid) -> Result<Grid> {
        self.geo.check_aligned(&mask.geo, "mask")?;
        let values = self
            .values
            .iter()
            .zip(&mask.values)
            .map(|(&v, &m)| if m == 1.0 && m != mask.nodata { v } else { self.nodata })
            .collect();
        Ok(Grid {
            geo: self.geo,
            nodata: self.nodata,
            values,
        })
    }
}

/// Raster of non-negative integer class codes; code 0 means "no class".
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalGrid {
    geo: GeoRef,
    codes: BTreeSet<u32>,
    values: Vec<u32>,
}

impl CategoricalGrid {
    /// Builds a grid whose codes must all appear in `code_table` (0 is
    /// always allowed).
    pub fn new(geo: GeoRef, values: Vec<u32>, code_table: &[u32]) -> Result<Self> {
        geo.validate()?;
        if values.len() != geo.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} codes, got {}",
                geo.len(),
                values.len()
            )));
        }
        let mut codes = BTreeSet::new();
        for &c in code_table {
            if !codes.insert(c) {
                return Err(Error::InvalidGrid(format!("duplicate code {c} in code table")));
            }
        }
        if let Some(c) = values.iter().find(|&&c| c != 0 && !codes.contains(&c)) {
            return Err(Error::InvalidGrid(format!("code {c} not in code table")));
        }
        codes.remove(&0);
        Ok(CategoricalGrid { geo, codes, values })
    }

    /// Builds a grid whose code table is the set of nonzero codes present.
    pub fn from_values(geo: GeoRef, values: Vec<u32>) -> Result<Self> {
        geo.validate()?;
        if values.len() != geo.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} codes, got {}",
                geo.len(),
                values.len()
            )));
        }
        let codes = values.iter().copied().filter(|&c| c != 0).collect();
        Ok(CategoricalGrid { geo, codes, values })
    }

    /// Interprets a real grid as codes: nodata becomes 0, every other value
    /// must be a non-negative integer.
    pub fn from_grid(grid: &Grid) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.values.len());
        for (i, &v) in grid.values.iter().enumerate() {
            if v == grid.nodata {
                values.push(0);
            } else if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                values.push(v as u32);
            } else {
                let (c, r) = grid.geo.col_row(i);
                return Err(Error::InvalidGrid(format!(
                    "cell ({c}, {r}) holds {v}, expected a non-negative integer code"
                )));
            }
        }
        Self::from_values(grid.geo, values)
    }

    /// Code 0 becomes nodata.
    pub fn to_grid(&self) -> Grid {
        let values = self
            .values
            .iter()
            .map(|&c| if c == 0 { DEFAULT_NODATA } else { c as f64 })
            .collect();
        Grid {
            geo: self.geo,
            nodata: DEFAULT_NODATA,
            values,
        }
    }

    pub fn geo(&self) -> &GeoRef {
        &self.geo
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn code_table(&self) -> &BTreeSet<u32> {
        &self.codes
    }

    pub fn get(&self, col: usize, row: usize) -> u32 {
        self.values[self.geo.index(col, row)]
    }

    /// Presence mask (1.0 / 0.0) of cells holding `code`.
    pub fn mask_of(&self, code: u32) -> Grid {
        let values = self.values.iter().map(|&c| if c == code { 1.0 } else { 0.0 }).collect();
        Grid {
            geo: self.geo,
            nodata: DEFAULT_NODATA,
            values,
        }
    }

    /// Histogram of codes; index `k` counts cells holding code `k`, for
    /// codes up to `max_code`.
    pub fn histogram(&self, max_code: u32) -> Vec<usize> {
        let mut h = vec![0usize; max_code as usize + 1];
        for &c in &self.values {
            if c <= max_code {
                h[c as usize] += 1;
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo(w: usize, h: usize) -> GeoRef {
        GeoRef::new(w, h, 0.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(GeoRef::new(0, 2, 0.0, 0.0, 1.0).is_err());
        assert!(GeoRef::new(2, 2, 0.0, 0.0, 0.0).is_err());
        assert!(Grid::new(geo(2, 2), -1.0, vec![0.0; 3]).is_err());
        assert!(Grid::new(geo(1, 1), -1.0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn locate_is_half_open() {
        let g = GeoRef::new(3, 2, 10.0, 20.0, 5.0).unwrap();
        assert_eq!(g.locate(10.0, 20.0), Some((0, 0)));
        assert_eq!(g.locate(14.999, 24.999), Some((0, 0)));
        assert_eq!(g.locate(15.0, 25.0), Some((1, 1)));
        assert_eq!(g.locate(25.0, 20.0), None);
        assert_eq!(g.locate(9.0, 20.0), None);
        assert_eq!(g.cell_center(2, 1), (22.5, 27.5));
    }

    #[test]
    fn alignment_is_an_equivalence() {
        let a = geo(4, 3);
        let b = geo(4, 3);
        let c = GeoRef::new(4, 3, 0.0, 0.0, 2.0).unwrap();
        assert!(a.is_aligned(&b) && b.is_aligned(&a));
        assert!(!a.is_aligned(&c) && !c.is_aligned(&a));
    }

    #[test]
    fn categorical_code_table() {
        assert!(CategoricalGrid::new(geo(2, 1), vec![1, 2], &[1, 2]).is_ok());
        assert!(CategoricalGrid::new(geo(2, 1), vec![1, 3], &[1, 2]).is_err());
        assert!(CategoricalGrid::new(geo(2, 1), vec![1, 1], &[1, 1]).is_err());
        let g = Grid::new(geo(3, 1), -1.0, vec![2.0, -1.0, 5.0]).unwrap();
        let cat = CategoricalGrid::from_grid(&g).unwrap();
        assert_eq!(cat.values(), &[2, 0, 5]);
        let bad = Grid::new(geo(1, 1), -1.0, vec![2.5]).unwrap();
        assert!(CategoricalGrid::from_grid(&bad).is_err());
    }

    #[test]
    fn masking() {
        let g = Grid::new(geo(3, 1), -1.0, vec![1.0, 2.0, 3.0]).unwrap();
        let m = Grid::new(geo(3, 1), -9.0, vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(g.masked(&m).unwrap().values(), &[1.0, -1.0, 3.0]);
    }
}
